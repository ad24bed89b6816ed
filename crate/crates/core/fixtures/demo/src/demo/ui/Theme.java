package demo.ui;

/** Colors and fonts for rendering. */
public class Theme {
    private String themeName;
    private int accentColor;

    // themes are applied before layout
    public Object applyTheme(Renderer renderer) {
        Object palette = null;
        return palette;
    }
}
