package demo.io;

/** Pool of reusable byte buffers. */
public class BufferPool {
    private int maximumBuffers;
    private Encoding bufferEncoding;

    // reset the buffer encoding before reuse
    public Object acquireBuffer(int size) {
        Object freeBuffer = null;
        return freeBuffer;
    }

    public Object releaseBuffer(byte[] buffer) {
        Object staleEncoding = null;
        return staleEncoding;
    }
}
