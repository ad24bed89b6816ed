package demo.io;

/** Writes rendered output to a stream. */
public class OutputWriter {
    private StringBuilder output;

    // flush after each line
    public Object writeLine(String line) {
        Object lineCount = null;
        return lineCount;
    }
}
