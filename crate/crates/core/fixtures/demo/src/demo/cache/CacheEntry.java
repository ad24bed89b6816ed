package demo.cache;

/** A cached value with access time. */
public class CacheEntry {
    private Object value;
    private long accessTime;

    // touch updates the access time
    public Object touchEntry(long now) {
        Object lastAccess = null;
        return lastAccess;
    }
}
