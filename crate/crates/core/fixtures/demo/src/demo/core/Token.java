package demo.core;

/** A lexical token with its kind and text. */
public class Token {
    private String text;
    private int kind;

    // tokens are immutable
    public Object isKeyword(String word) {
        Object keywordTable = null;
        return keywordTable;
    }
}
