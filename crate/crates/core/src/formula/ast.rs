use std::fmt;

use serde::{Deserialize, Serialize};

/// Operator symbol inserted between juxtaposed atoms (`\pi r` is `π ⁢ r`).
pub const IMPLICIT_TIMES: &str = "\u{2062}";
/// Symbol used for both `\frac{a}{b}` and `a/b`.
pub const FRACTION: &str = "/";
pub const SQRT: &str = "√";
pub const MINUS: &str = "−";

/// Names that head function applications. They are never treated as
/// variables by canonicalization or pattern matching.
pub const FUNCTION_NAMES: &[&str] = &[
    "sin", "cos", "tan", "cot", "sec", "csc", "arcsin", "arccos", "arctan", "sinh", "cosh", "tanh", "coth",
    "log", "ln", "lg", "exp", "det", "dim", "ker", "deg", "gcd", "max", "min", "lim", "sup", "inf", "arg",
    "Pr",
];

pub fn is_function_name(name: &str) -> bool {
    FUNCTION_NAMES.contains(&name)
}

/// An identifier that takes part in renaming (everything except function names).
pub fn is_variable_name(name: &str) -> bool {
    !is_function_name(name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixity {
    Prefix,
    Infix,
    Postfix,
}

/// A node of a parsed formula.
///
/// Large operators (`\sum`, `\prod`, `\int`, ...) are prefix operators whose
/// operands are either `[body]` or `[lower, upper, body]`; a missing bound is
/// an empty `Sequence`. `\sqrt[n]{x}` is `Operator("√", [x, n])`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "camelCase")]
pub enum AstNode {
    Identifier {
        name: String,
    },
    Number {
        lexeme: String,
    },
    Operator {
        symbol: String,
        operands: Vec<AstNode>,
        fixity: Fixity,
    },
    Apply {
        function: Box<AstNode>,
        arguments: Vec<AstNode>,
    },
    Relation {
        symbol: String,
        left: Box<AstNode>,
        right: Box<AstNode>,
    },
    Sequence {
        items: Vec<AstNode>,
    },
    Sub {
        base: Box<AstNode>,
        script: Box<AstNode>,
    },
    Sup {
        base: Box<AstNode>,
        script: Box<AstNode>,
    },
    /// Pattern-only leaf; `?_` is anonymous.
    Wildcard {
        tag: String,
    },
}

pub const ANONYMOUS_WILDCARD: &str = "_";

impl AstNode {
    pub fn ident(name: impl Into<String>) -> Self {
        AstNode::Identifier { name: name.into() }
    }

    pub fn number(lexeme: impl Into<String>) -> Self {
        AstNode::Number {
            lexeme: lexeme.into(),
        }
    }

    pub fn infix(symbol: impl Into<String>, left: AstNode, right: AstNode) -> Self {
        AstNode::Operator {
            symbol: symbol.into(),
            operands: vec![left, right],
            fixity: Fixity::Infix,
        }
    }

    pub fn prefix(symbol: impl Into<String>, operands: Vec<AstNode>) -> Self {
        AstNode::Operator {
            symbol: symbol.into(),
            operands,
            fixity: Fixity::Prefix,
        }
    }

    pub fn postfix(symbol: impl Into<String>, operand: AstNode) -> Self {
        AstNode::Operator {
            symbol: symbol.into(),
            operands: vec![operand],
            fixity: Fixity::Postfix,
        }
    }

    pub fn relation(symbol: impl Into<String>, left: AstNode, right: AstNode) -> Self {
        AstNode::Relation {
            symbol: symbol.into(),
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn apply(function: AstNode, arguments: Vec<AstNode>) -> Self {
        AstNode::Apply {
            function: Box::new(function),
            arguments,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(base: AstNode, script: AstNode) -> Self {
        AstNode::Sub {
            base: Box::new(base),
            script: Box::new(script),
        }
    }

    pub fn sup(base: AstNode, script: AstNode) -> Self {
        AstNode::Sup {
            base: Box::new(base),
            script: Box::new(script),
        }
    }

    pub fn wildcard(tag: impl Into<String>) -> Self {
        AstNode::Wildcard { tag: tag.into() }
    }

    /// Children in pre-order visiting order.
    pub fn children(&self) -> Vec<&AstNode> {
        match self {
            AstNode::Identifier { .. } | AstNode::Number { .. } | AstNode::Wildcard { .. } => Vec::new(),
            AstNode::Operator { operands, .. } => operands.iter().collect(),
            AstNode::Apply { function, arguments } => std::iter::once(function.as_ref())
                .chain(arguments.iter())
                .collect(),
            AstNode::Relation { left, right, .. } => vec![left, right],
            AstNode::Sequence { items } => items.iter().collect(),
            AstNode::Sub { base, script } | AstNode::Sup { base, script } => vec![base, script],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut AstNode> {
        match self {
            AstNode::Identifier { .. } | AstNode::Number { .. } | AstNode::Wildcard { .. } => Vec::new(),
            AstNode::Operator { operands, .. } => operands.iter_mut().collect(),
            AstNode::Apply { function, arguments } => std::iter::once(function.as_mut())
                .chain(arguments.iter_mut())
                .collect(),
            AstNode::Relation { left, right, .. } => vec![left, right],
            AstNode::Sequence { items } => items.iter_mut().collect(),
            AstNode::Sub { base, script } | AstNode::Sup { base, script } => vec![base, script],
        }
    }

    pub fn at(&self, path: &NodePath) -> Option<&AstNode> {
        let mut node = self;
        for &step in &path.0 {
            node = node.children().into_iter().nth(step)?;
        }
        Some(node)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Distinct identifier names in pre-order of first occurrence.
    pub fn identifiers(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.walk(&mut |node| {
            if let AstNode::Identifier { name } = node {
                if !out.contains(&name.as_str()) {
                    out.push(name.as_str());
                }
            }
        });
        out
    }

    pub fn contains_identifier(&self, name: &str) -> bool {
        let mut found = false;
        self.walk(&mut |node| {
            if matches!(node, AstNode::Identifier { name: n } if n == name) {
                found = true;
            }
        });
        found
    }

    pub fn has_wildcards(&self) -> bool {
        let mut found = false;
        self.walk(&mut |node| {
            if matches!(node, AstNode::Wildcard { .. }) {
                found = true;
            }
        });
        found
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a AstNode)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }
}

pub fn is_large_operator_symbol(symbol: &str) -> bool {
    matches!(symbol, "∑" | "∏" | "∫" | "∬" | "∮" | "⋃" | "⋂")
}

pub fn is_integral_symbol(symbol: &str) -> bool {
    matches!(symbol, "∫" | "∬" | "∮")
}

/// Address of a node as child indices from the root (root is the empty path).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, index: usize) -> Self {
        let mut steps = self.0.clone();
        steps.push(index);
        NodePath(steps)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for step in &self.0 {
            write!(f, "/{step}")?;
        }
        Ok(())
    }
}

/// A parsed formula together with the TeX it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaAst {
    pub root: AstNode,
    pub source: String,
}

impl FormulaAst {
    pub fn new(root: AstNode, source: impl Into<String>) -> Self {
        FormulaAst {
            root,
            source: source.into(),
        }
    }
}

// Binding strength used by both the TeX printer and the MathML writer to
// decide where grouping is required. Higher binds tighter.
pub(crate) const PREC_SEQUENCE: u8 = 5;
pub(crate) const PREC_RELATION: u8 = 10;
pub(crate) const PREC_ADDITIVE: u8 = 20;
pub(crate) const PREC_SIGNED: u8 = 30;
pub(crate) const PREC_MULTIPLICATIVE: u8 = 40;
pub(crate) const PREC_LARGE_OP: u8 = 45;
pub(crate) const PREC_IMPLICIT: u8 = 50;
pub(crate) const PREC_APPLY: u8 = 60;
pub(crate) const PREC_POSTFIX: u8 = 70;
pub(crate) const PREC_SCRIPT: u8 = 80;
pub(crate) const PREC_ATOM: u8 = 90;

pub(crate) fn is_additive_symbol(symbol: &str) -> bool {
    matches!(symbol, "+" | MINUS | "±" | "∓")
}

pub(crate) fn is_multiplicative_symbol(symbol: &str) -> bool {
    matches!(symbol, "*" | "·" | "×" | "÷")
}

pub(crate) fn precedence(node: &AstNode) -> u8 {
    match node {
        AstNode::Identifier { .. } | AstNode::Number { .. } | AstNode::Wildcard { .. } => PREC_ATOM,
        AstNode::Sequence { items } if items.len() == 1 => precedence(&items[0]),
        AstNode::Sequence { .. } => PREC_SEQUENCE,
        AstNode::Relation { .. } => PREC_RELATION,
        AstNode::Apply { .. } => PREC_APPLY,
        AstNode::Sub { .. } | AstNode::Sup { .. } => PREC_SCRIPT,
        AstNode::Operator {
            symbol,
            operands,
            fixity,
        } => match fixity {
            Fixity::Postfix => PREC_POSTFIX,
            Fixity::Prefix if symbol == SQRT => PREC_ATOM,
            Fixity::Prefix if is_large_operator_symbol(symbol) => PREC_LARGE_OP,
            Fixity::Prefix => PREC_SIGNED,
            Fixity::Infix if symbol == FRACTION && operands.len() == 2 => PREC_ATOM,
            Fixity::Infix if symbol == IMPLICIT_TIMES => PREC_IMPLICIT,
            Fixity::Infix if is_multiplicative_symbol(symbol) => PREC_MULTIPLICATIVE,
            Fixity::Infix if is_additive_symbol(symbol) => PREC_ADDITIVE,
            Fixity::Infix => PREC_MULTIPLICATIVE,
        },
    }
}

/// Minimum precedence each operand of an infix operator must have to be
/// written without grouping, as `(left, right)`.
pub(crate) fn infix_operand_precedence(symbol: &str) -> (u8, u8) {
    if symbol == IMPLICIT_TIMES {
        (PREC_IMPLICIT, PREC_APPLY)
    } else if is_additive_symbol(symbol) {
        (PREC_ADDITIVE, PREC_SIGNED)
    } else {
        (PREC_MULTIPLICATIVE, PREC_IMPLICIT)
    }
}
