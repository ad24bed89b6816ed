package demo.ui;

/** A visual widget with alignment and bounds. */
public class Widget {
    private int alignment;
    private boolean visible;

    // widgets report their preferred alignment
    public Object setAlignment(int align) {
        Object previousAlignment = null;
        return previousAlignment;
    }

    public Object drawSelf(Renderer renderer) {
        Object drawn = null;
        return drawn;
    }
}
