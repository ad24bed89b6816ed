package demo.cache;

/** Eviction order for cache entries. */
public class Eviction {
    private int evictionCount;

    // the victim is the least recently used entry
    public Object chooseVictim(LruCache cache) {
        Object victimEntry = null;
        return victimEntry;
    }
}
