package demo.io;

/** Character encodings and charset lookup. */
public class Encoding {
    private String charsetName;

    // unknown charset names fall back to utf8
    public Object lookupCharset(String name) {
        Object charsetTable = null;
        return charsetTable;
    }

    public Object decodeBytes(byte[] data) {
        Object decoded = null;
        return decoded;
    }
}
