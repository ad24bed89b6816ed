package demo.ui;

/** Positions widgets and computes their alignment. */
public class Layout {
    private int columns;
    private Theme layoutTheme;

    // alignment is relative to the parent layout
    public Object alignWidget(Widget widget) {
        Object alignment = null;
        return alignment;
    }

    public Object computeBounds(int width) {
        Object bounds = null;
        return bounds;
    }
}
