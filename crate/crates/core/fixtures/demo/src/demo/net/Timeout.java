package demo.net;

/** Connection and read timeouts. */
public class Timeout {
    private long connectTimeout;
    private long readTimeout;

    // timeouts are in milliseconds
    public Object remaining(long start) {
        Object elapsed = null;
        return elapsed;
    }
}
