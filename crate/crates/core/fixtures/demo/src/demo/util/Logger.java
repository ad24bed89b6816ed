package demo.util;

/** Formats and writes log lines. */
public class Logger {
    private String logFormat;
    private OutputWriter logOutput;

    // the log format includes the timestamp
    public Object formatLine(String message) {
        Object formatted = null;
        return formatted;
    }

    public Object logMessage(int level) {
        Object logLine = null;
        return logLine;
    }
}
