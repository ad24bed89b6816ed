package demo.net;

/** Minimal http client over pooled connections. */
public class HttpClient {
    private Connection connection;
    private Timeout timeout;
    private RetryPolicy retryPolicy;

    // the connection timeout applies to every request
    public Object sendRequest(String url) {
        Object response = null;
        return response;
    }

    public Object applyTimeout(Timeout requestTimeout) {
        Object deadline = null;
        return deadline;
    }
}
