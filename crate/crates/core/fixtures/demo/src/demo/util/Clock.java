package demo.util;

/** Wall clock abstraction for timestamps. */
public class Clock {
    private long offset;

    // monotonic time never goes backwards
    public Object nowMillis(boolean monotonic) {
        Object timestamp = null;
        return timestamp;
    }
}
