use super::ast::*;

const FUNCTION_APPLICATION: &str = "\u{2061}";

/// Presentation MathML for a formula tree.
pub fn to_mathml(ast: &FormulaAst) -> String {
    node_to_mathml(&ast.root)
}

pub fn node_to_mathml(node: &AstNode) -> String {
    to_mathml_marked(node, &[])
}

/// Like [`node_to_mathml`], wrapping every node whose path is listed in
/// `<mrow class="highlight">`.
pub fn to_mathml_marked(node: &AstNode, marked: &[NodePath]) -> String {
    let mut w = Writer {
        out: String::from("<math>"),
        marked,
    };
    w.node(node, &NodePath::root(), 0);
    w.out.push_str("</math>");
    w.out
}

struct Writer<'a> {
    out: String,
    marked: &'a [NodePath],
}

fn escape(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
}

impl Writer<'_> {
    fn leaf(&mut self, tag: &str, text: &str) {
        self.out.push('<');
        self.out.push_str(tag);
        self.out.push('>');
        escape(text, &mut self.out);
        self.out.push_str("</");
        self.out.push_str(tag);
        self.out.push('>');
    }

    fn mo(&mut self, text: &str) {
        self.leaf("mo", text);
    }

    fn open(&mut self, tag: &str) {
        self.out.push('<');
        self.out.push_str(tag);
        self.out.push('>');
    }

    fn close(&mut self, tag: &str) {
        self.out.push_str("</");
        self.out.push_str(tag);
        self.out.push('>');
    }

    fn node(&mut self, node: &AstNode, path: &NodePath, min_prec: u8) {
        let marked = self.marked.contains(path);
        if marked {
            self.out.push_str("<mrow class=\"highlight\">");
        }
        if precedence(node) < min_prec {
            self.open("mrow");
            self.mo("(");
            self.bare(node, path);
            self.mo(")");
            self.close("mrow");
        } else {
            self.bare(node, path);
        }
        if marked {
            self.close("mrow");
        }
    }

    fn bare(&mut self, node: &AstNode, path: &NodePath) {
        match node {
            AstNode::Identifier { name } => self.leaf("mi", name),
            AstNode::Number { lexeme } => self.leaf("mn", lexeme),
            AstNode::Wildcard { tag } => self.leaf("mi", &format!("?{tag}")),
            AstNode::Sequence { items } => {
                self.open("mrow");
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.mo(",");
                    }
                    self.node(item, &path.child(i), PREC_RELATION);
                }
                self.close("mrow");
            }
            AstNode::Relation { symbol, left, right } => {
                self.open("mrow");
                self.node(left, &path.child(0), PREC_RELATION);
                self.mo(symbol);
                self.node(right, &path.child(1), PREC_ADDITIVE);
                self.close("mrow");
            }
            AstNode::Sub { base, script } | AstNode::Sup { base, script } => {
                let tag = if matches!(node, AstNode::Sub { .. }) {
                    "msub"
                } else {
                    "msup"
                };
                self.open(tag);
                self.node(base, &path.child(0), PREC_ATOM);
                self.node(script, &path.child(1), 0);
                self.close(tag);
            }
            AstNode::Apply { function, arguments } => {
                self.open("mrow");
                self.node(function, &path.child(0), 0);
                self.mo(FUNCTION_APPLICATION);
                let simple = arguments.len() == 1 && precedence(&arguments[0]) >= PREC_SCRIPT;
                if simple {
                    self.node(&arguments[0], &path.child(1), PREC_SCRIPT);
                } else {
                    self.open("mrow");
                    self.mo("(");
                    for (i, arg) in arguments.iter().enumerate() {
                        if i > 0 {
                            self.mo(",");
                        }
                        self.node(arg, &path.child(i + 1), PREC_RELATION);
                    }
                    self.mo(")");
                    self.close("mrow");
                }
                self.close("mrow");
            }
            AstNode::Operator {
                symbol,
                operands,
                fixity,
            } => self.operator(symbol, operands, *fixity, path),
        }
    }

    fn operator(&mut self, symbol: &str, operands: &[AstNode], fixity: Fixity, path: &NodePath) {
        match fixity {
            Fixity::Infix if symbol == FRACTION && operands.len() == 2 => {
                self.open("mfrac");
                self.node(&operands[0], &path.child(0), 0);
                self.node(&operands[1], &path.child(1), 0);
                self.close("mfrac");
            }
            Fixity::Infix => {
                let (lmin, rmin) = infix_operand_precedence(symbol);
                self.open("mrow");
                for (i, operand) in operands.iter().enumerate() {
                    if i > 0 {
                        self.mo(symbol);
                    }
                    self.node(operand, &path.child(i), if i == 0 { lmin } else { rmin });
                }
                self.close("mrow");
            }
            Fixity::Prefix if symbol == SQRT => {
                if operands.len() >= 2 {
                    self.open("mroot");
                    self.node(&operands[0], &path.child(0), 0);
                    self.node(&operands[1], &path.child(1), 0);
                    self.close("mroot");
                } else {
                    self.open("msqrt");
                    for (i, operand) in operands.iter().enumerate() {
                        self.node(operand, &path.child(i), 0);
                    }
                    self.close("msqrt");
                }
            }
            Fixity::Prefix if is_large_operator_symbol(symbol) && operands.len() == 3 => {
                let empty = |n: &AstNode| matches!(n, AstNode::Sequence { items } if items.is_empty());
                let (lower, upper, body) = (&operands[0], &operands[1], &operands[2]);
                let integral = is_integral_symbol(symbol);
                let tag = match (empty(lower), empty(upper)) {
                    (false, false) if integral => "msubsup",
                    (false, true) if integral => "msub",
                    (true, false) if integral => "msup",
                    (false, false) => "munderover",
                    (false, true) => "munder",
                    (true, false) => "mover",
                    (true, true) => "",
                };
                self.open("mrow");
                if tag.is_empty() {
                    self.mo(symbol);
                } else {
                    self.open(tag);
                    self.mo(symbol);
                    if !empty(lower) {
                        self.node(lower, &path.child(0), 0);
                    }
                    if !empty(upper) {
                        self.node(upper, &path.child(1), 0);
                    }
                    self.close(tag);
                }
                self.node(body, &path.child(2), PREC_LARGE_OP);
                self.close("mrow");
            }
            Fixity::Prefix => {
                self.open("mrow");
                self.mo(symbol);
                for (i, operand) in operands.iter().enumerate() {
                    self.node(operand, &path.child(i), PREC_SIGNED);
                }
                self.close("mrow");
            }
            Fixity::Postfix => {
                self.open("mrow");
                for (i, operand) in operands.iter().enumerate() {
                    self.node(operand, &path.child(i), PREC_POSTFIX);
                }
                self.mo(symbol);
                self.close("mrow");
            }
        }
    }
}
