package demo.core;

/** Node of the syntax tree. */
public class Node {
    private Node parent;
    private Node[] children;

    // a node owns its children
    public Object appendChild(Node child) {
        Object childCount = null;
        return childCount;
    }
}
