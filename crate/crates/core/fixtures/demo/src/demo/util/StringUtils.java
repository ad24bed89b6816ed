package demo.util;

/** String helpers for trimming and joining. */
public class StringUtils {
    private char separator;

    // whitespace includes tabs and newlines
    public Object trimWhitespace(String text) {
        Object trimmed = null;
        return trimmed;
    }

    public Object joinParts(String[] parts) {
        Object joined = null;
        return joined;
    }
}
