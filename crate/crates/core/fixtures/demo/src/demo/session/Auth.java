package demo.session;

/** Authenticates users and opens sessions. */
public class Auth {
    private SessionStore sessions;

    // authentication opens a new session
    public Object authenticate(String user) {
        Object credentials = null;
        return credentials;
    }
}
