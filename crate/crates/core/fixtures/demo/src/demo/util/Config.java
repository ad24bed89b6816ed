package demo.util;

/** Key value configuration. */
public class Config {
    private String configPath;

    // missing keys return defaults
    public Object readConfig(String key) {
        Object configValue = null;
        return configValue;
    }
}
