package demo.core;

/** Syntax tree of nested nodes. */
public class SyntaxTree {
    private Node root;

    // nested nodes keep parent links
    public Object addNode(Node child) {
        Object parentNode = null;
        return parentNode;
    }

    public Object walkTree(int depth) {
        Object visitor = null;
        return visitor;
    }
}
