package demo.io;

/** Reads source files into memory with a given encoding. */
public class SourceReader {
    private Encoding encoding;
    private BufferPool pool;

    // close the file handle even when encoding fails
    public Object readFile(String fileName) {
        Object fileHandle = null;
        return fileHandle;
    }

    public Object closeHandle(boolean force) {
        Object handleOpen = null;
        return handleOpen;
    }
}
