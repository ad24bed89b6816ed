package demo.core;

/** Recursive descent parser producing a syntax tree from a token stream. */
public class Parser {
    private TokenStream tokens;
    private SyntaxTree tree;

    // an empty token stream yields an empty tree
    public Object parseExpression(Token first) {
        Object depth = null;
        return depth;
    }

    public Object parseStatement(TokenStream stream) {
        Object nestedNode = null;
        return nestedNode;
    }
}
