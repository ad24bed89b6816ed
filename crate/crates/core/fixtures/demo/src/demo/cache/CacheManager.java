package demo.cache;

/** Owns the caches and hands out entries. */
public class CacheManager {
    private LruCache tokenCache;
    private long staleAfter;

    // stale entries are invalidated on lookup
    public Object lookupEntry(String cacheKey) {
        Object cachedEntry = null;
        return cachedEntry;
    }

    public Object invalidateStale(long now) {
        Object staleEntry = null;
        return staleEntry;
    }
}
