package demo.core;

/** Buffered stream of tokens with lookahead. */
public class TokenStream {
    private Token[] buffer;
    private int cursor;

    // lookahead never moves the cursor
    public Object peekToken(int offset) {
        Object lookahead = null;
        return lookahead;
    }

    public Object isEmpty(boolean strict) {
        Object remaining = null;
        return remaining;
    }
}
