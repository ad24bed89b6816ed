package demo.net;

/** Retry policy with bounded attempts and backoff. */
public class RetryPolicy {
    private int maxAttempts;
    private long backoff;

    // stop retrying after the maximum number of attempts
    public Object shouldRetry(int attempt) {
        Object retryAllowed = null;
        return retryAllowed;
    }

    public Object nextBackoff(long previous) {
        Object delay = null;
        return delay;
    }
}
