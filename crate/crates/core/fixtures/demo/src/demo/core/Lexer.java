package demo.core;

/** Splits source text into tokens and decodes unicode escapes. */
public class Lexer {
    private String input;
    private int position;

    // unicode escape sequences use four hex digits
    public Object nextToken(char current) {
        Object escapeSequence = null;
        return escapeSequence;
    }

    public Object readUnicodeEscape(String digits) {
        Object codePoint = null;
        return codePoint;
    }
}
