package demo.net;

/** A network connection that may be reset. */
public class Connection {
    private boolean open;
    private int resetCount;

    // a connection reset closes the socket
    public Object openConnection(String host) {
        Object socket = null;
        return socket;
    }

    public Object handleReset(int attempt) {
        Object resetError = null;
        return resetError;
    }
}
