package demo.session;

/** Opaque session key. */
public class SessionKey {
    private String keyValue;

    // keys are regenerated on login
    public Object regenerateKey(long seed) {
        Object newKey = null;
        return newKey;
    }
}
