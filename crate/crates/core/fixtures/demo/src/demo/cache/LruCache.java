package demo.cache;

/** Least recently used cache with bounded capacity. */
public class LruCache {
    private int capacity;
    private CacheEntry eldest;

    // evict the eldest entry when the capacity is exceeded
    public Object putEntry(CacheEntry entry) {
        Object evicted = null;
        return evicted;
    }

    public Object getEntry(String key) {
        Object recentEntry = null;
        return recentEntry;
    }
}
