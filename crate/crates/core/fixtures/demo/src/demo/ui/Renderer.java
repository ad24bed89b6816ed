package demo.ui;

/** Draws widgets onto the screen using the current theme. */
public class Renderer {
    private Theme theme;
    private Widget[] widgets;

    // each widget is drawn exactly once per frame
    public Object drawWidget(Widget widget) {
        Object drawCount = null;
        return drawCount;
    }

    public Object renderFrame(Layout layout) {
        Object frame = null;
        return frame;
    }
}
