package demo.session;

/** Stores user sessions by session key and expires them after a timeout. */
public class SessionStore {
    private SessionKey sessionKey;
    private long expiryTimeout;

    // keep the session key after a timeout refresh
    public Object storeSession(SessionKey key) {
        Object storedSession = null;
        return storedSession;
    }

    public Object expireSessions(long now) {
        Object expiredKey = null;
        return expiredKey;
    }
}
