//! Recursive-descent parser for the supported TeX math subset.
//!
//! Precedence, loosest first: `,` lists, relations, `+ −`, unary signs,
//! explicit `* / · ×`, large operators, implicit multiplication, function
//! application, postfix `!`, scripts `^ _`.

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {position}: expected {expected}")]
pub struct ParseError {
    /// Byte offset into the source.
    pub position: usize,
    pub expected: String,
}

impl ParseError {
    fn new(position: usize, expected: impl Into<String>) -> Self {
        ParseError {
            position,
            expected: expected.into(),
        }
    }
}

/// Parses a math-mode TeX fragment.
pub fn parse_tex_formula(tex: &str) -> Result<FormulaAst, ParseError> {
    let root = parse_node(tex, false)?;
    Ok(FormulaAst::new(root, tex))
}

pub(crate) fn parse_node(tex: &str, allow_wildcards: bool) -> Result<AstNode, ParseError> {
    let tokens = lex(tex, allow_wildcards)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: tex.len(),
    };
    if parser.tokens.is_empty() {
        return Err(ParseError::new(0, "expression"));
    }
    let node = parser.sequence()?;
    if let Some(tok) = parser.peek() {
        return Err(ParseError::new(
            tok.offset,
            format!("end of formula, found {}", tok.kind.describe()),
        ));
    }
    Ok(node)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Letter(String),
    Number(String),
    Function(String),
    LargeOp(String),
    Frac,
    Sqrt,
    /// `\mathrm{...}`: a plain (possibly multi-letter) identifier.
    Roman(String),
    Wildcard(String),
    Sym(char),
    Rel(String),
    Prime,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Letter(s) | TokenKind::Roman(s) => format!("identifier '{s}'"),
            TokenKind::Number(s) => format!("number '{s}'"),
            TokenKind::Function(s) => format!("function '\\{s}'"),
            TokenKind::LargeOp(s) => format!("operator '{s}'"),
            TokenKind::Frac => "'\\frac'".into(),
            TokenKind::Sqrt => "'\\sqrt'".into(),
            TokenKind::Wildcard(s) => format!("wildcard '?{s}'"),
            TokenKind::Sym(c) => format!("'{c}'"),
            TokenKind::Rel(s) => format!("relation '{s}'"),
            TokenKind::Prime => "prime".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn greek(name: &str) -> Option<char> {
    Some(match name {
        "alpha" => 'α',
        "beta" => 'β',
        "gamma" => 'γ',
        "delta" => 'δ',
        "epsilon" => 'ϵ',
        "varepsilon" => 'ε',
        "zeta" => 'ζ',
        "eta" => 'η',
        "theta" => 'θ',
        "vartheta" => 'ϑ',
        "iota" => 'ι',
        "kappa" => 'κ',
        "lambda" => 'λ',
        "mu" => 'μ',
        "nu" => 'ν',
        "xi" => 'ξ',
        "pi" => 'π',
        "varpi" => 'ϖ',
        "rho" => 'ρ',
        "varrho" => 'ϱ',
        "sigma" => 'σ',
        "varsigma" => 'ς',
        "tau" => 'τ',
        "upsilon" => 'υ',
        "phi" => 'ϕ',
        "varphi" => 'φ',
        "chi" => 'χ',
        "psi" => 'ψ',
        "omega" => 'ω',
        "Gamma" => 'Γ',
        "Delta" => 'Δ',
        "Theta" => 'Θ',
        "Lambda" => 'Λ',
        "Xi" => 'Ξ',
        "Pi" => 'Π',
        "Sigma" => 'Σ',
        "Upsilon" => 'Υ',
        "Phi" => 'Φ',
        "Psi" => 'Ψ',
        "Omega" => 'Ω',
        "infty" => '∞',
        "partial" => '∂',
        "ell" => 'ℓ',
        "hbar" => 'ℏ',
        "nabla" => '∇',
        _ => return None,
    })
}

/// Reverse of the command table, used by the TeX printer.
pub(crate) fn command_for_char(c: char) -> Option<&'static str> {
    const NAMES: &[&str] = &[
        "alpha",
        "beta",
        "gamma",
        "delta",
        "epsilon",
        "varepsilon",
        "zeta",
        "eta",
        "theta",
        "vartheta",
        "iota",
        "kappa",
        "lambda",
        "mu",
        "nu",
        "xi",
        "pi",
        "varpi",
        "rho",
        "varrho",
        "sigma",
        "varsigma",
        "tau",
        "upsilon",
        "phi",
        "varphi",
        "chi",
        "psi",
        "omega",
        "Gamma",
        "Delta",
        "Theta",
        "Lambda",
        "Xi",
        "Pi",
        "Sigma",
        "Upsilon",
        "Phi",
        "Psi",
        "Omega",
        "infty",
        "partial",
        "ell",
        "hbar",
        "nabla",
    ];
    NAMES.iter().copied().find(|n| greek(n) == Some(c))
}

fn relation_command(name: &str) -> Option<&'static str> {
    Some(match name {
        "leq" | "le" => "≤",
        "geq" | "ge" => "≥",
        "neq" | "ne" => "≠",
        "lt" => "<",
        "gt" => ">",
        "approx" => "≈",
        "equiv" => "≡",
        "sim" => "∼",
        "to" | "rightarrow" => "→",
        "mapsto" => "↦",
        "in" => "∈",
        "notin" => "∉",
        "subset" => "⊂",
        "subseteq" => "⊆",
        _ => return None,
    })
}

fn large_operator_command(name: &str) -> Option<&'static str> {
    Some(match name {
        "sum" => "∑",
        "prod" => "∏",
        "int" => "∫",
        "iint" => "∬",
        "oint" => "∮",
        "bigcup" => "⋃",
        "bigcap" => "⋂",
        _ => return None,
    })
}

fn lex(src: &str, allow_wildcards: bool) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some((offset, c)) = chars.next() {
        let kind = match c {
            c if c.is_whitespace() || c == '~' || c == '&' => continue,
            '0'..='9' => {
                let mut end = offset + 1;
                let mut seen_dot = false;
                while let Some(&(i, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        end = i + 1;
                        chars.next();
                    } else if d == '.' && !seen_dot {
                        // only a decimal point if a digit follows
                        let rest = &src[i + 1..];
                        if rest.starts_with(|ch: char| ch.is_ascii_digit()) {
                            seen_dot = true;
                            end = i + 1;
                            chars.next();
                        } else {
                            break;
                        }
                    } else {
                        break;
                    }
                }
                TokenKind::Number(src[offset..end].to_string())
            }
            '?' => {
                if !allow_wildcards {
                    return Err(ParseError::new(offset, "formula token, found '?'"));
                }
                let mut tag = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        tag.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if tag.is_empty() {
                    return Err(ParseError::new(offset, "wildcard name after '?'"));
                }
                TokenKind::Wildcard(tag)
            }
            '\\' => {
                let mut name = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_alphabetic() {
                        name.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    match chars.next() {
                        Some((_, ',' | ';' | ':' | '!' | ' ')) => continue,
                        Some((_, '{')) => TokenKind::Sym('('),
                        Some((_, '}')) => TokenKind::Sym(')'),
                        _ => return Err(ParseError::new(offset, "command name after '\\'")),
                    }
                } else if let Some(g) = greek(&name) {
                    TokenKind::Letter(g.to_string())
                } else if let Some(r) = relation_command(&name) {
                    TokenKind::Rel(r.to_string())
                } else if let Some(op) = large_operator_command(&name) {
                    TokenKind::LargeOp(op.to_string())
                } else if is_function_name(&name) {
                    TokenKind::Function(name)
                } else {
                    match name.as_str() {
                        "quad" | "qquad" | "displaystyle" | "limits" => continue,
                        "left" | "right" => {
                            // `\left.` is an invisible delimiter
                            if let Some(&(_, '.')) = chars.peek() {
                                chars.next();
                            }
                            continue;
                        }
                        "frac" | "dfrac" | "tfrac" => TokenKind::Frac,
                        "sqrt" => TokenKind::Sqrt,
                        "cdot" => TokenKind::Sym('·'),
                        "times" => TokenKind::Sym('×'),
                        "div" => TokenKind::Sym('÷'),
                        "pm" => TokenKind::Sym('±'),
                        "mp" => TokenKind::Sym('∓'),
                        "mathrm" | "operatorname" => {
                            let word = read_braced_word(&mut chars, offset)?;
                            if name == "operatorname" {
                                TokenKind::Function(word)
                            } else {
                                TokenKind::Roman(word)
                            }
                        }
                        _ => {
                            return Err(ParseError::new(
                                offset,
                                format!("supported command, found '\\{name}'"),
                            ))
                        }
                    }
                }
            }
            '+' | '*' | '/' | '^' | '_' | '(' | ')' | '[' | ']' | '{' | '}' | ',' | '!' => TokenKind::Sym(c),
            '-' | '−' => TokenKind::Sym('-'),
            '·' | '×' | '÷' | '±' | '∓' => TokenKind::Sym(c),
            '\'' => TokenKind::Prime,
            '=' | '<' | '>' | '≤' | '≥' | '≠' => TokenKind::Rel(c.to_string()),
            c if c.is_alphabetic() => TokenKind::Letter(c.to_string()),
            '∞' | '∂' | '∇' => TokenKind::Letter(c.to_string()),
            other => return Err(ParseError::new(offset, format!("formula token, found '{other}'"))),
        };
        tokens.push(Token { kind, offset });
    }
    Ok(tokens)
}

fn read_braced_word(
    chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>,
    command_offset: usize,
) -> Result<String, ParseError> {
    while matches!(chars.peek(), Some(&(_, c)) if c.is_whitespace()) {
        chars.next();
    }
    match chars.next() {
        Some((_, '{')) => {}
        _ => return Err(ParseError::new(command_offset, "'{' after command")),
    }
    let mut word = String::new();
    for (i, c) in chars.by_ref() {
        if c == '}' {
            let word = word.trim().to_string();
            if word.is_empty() || !word.chars().all(|ch| ch.is_alphabetic()) {
                return Err(ParseError::new(i, "letters inside \\mathrm"));
            }
            return Ok(word);
        }
        word.push(c);
    }
    Err(ParseError::new(command_offset, "closing brace"))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.peek().map(|t| t.offset).unwrap_or(self.end)
    }

    fn is_sym(&self, c: char) -> bool {
        matches!(self.peek_kind(), Some(TokenKind::Sym(s)) if *s == c)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error_here(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(tok) => ParseError::new(tok.offset, format!("{expected}, found {}", tok.kind.describe())),
            None => ParseError::new(self.end, format!("{expected}, found end of formula")),
        }
    }

    fn sequence(&mut self) -> Result<AstNode, ParseError> {
        let first = self.relation()?;
        if !self.is_sym(',') {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_sym(',') {
            items.push(self.relation()?);
        }
        Ok(AstNode::Sequence { items })
    }

    fn relation(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.additive()?;
        while let Some(TokenKind::Rel(symbol)) = self.peek_kind() {
            let symbol = symbol.clone();
            self.pos += 1;
            let right = self.additive()?;
            left = AstNode::relation(symbol, left, right);
        }
        Ok(left)
    }

    fn additive(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.signed()?;
        loop {
            let symbol = match self.peek_kind() {
                Some(TokenKind::Sym('+')) => "+",
                Some(TokenKind::Sym('-')) => MINUS,
                Some(TokenKind::Sym('±')) => "±",
                Some(TokenKind::Sym('∓')) => "∓",
                _ => break,
            };
            self.pos += 1;
            let right = self.signed()?;
            left = AstNode::infix(symbol, left, right);
        }
        Ok(left)
    }

    fn signed(&mut self) -> Result<AstNode, ParseError> {
        let symbol = match self.peek_kind() {
            Some(TokenKind::Sym('+')) => "+",
            Some(TokenKind::Sym('-')) => MINUS,
            Some(TokenKind::Sym('±')) => "±",
            Some(TokenKind::Sym('∓')) => "∓",
            _ => return self.multiplicative(),
        };
        self.pos += 1;
        let operand = self.signed()?;
        Ok(AstNode::prefix(symbol, vec![operand]))
    }

    fn multiplicative(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.implicit()?;
        loop {
            let symbol = match self.peek_kind() {
                Some(TokenKind::Sym('*')) => "*",
                Some(TokenKind::Sym('/')) => FRACTION,
                Some(TokenKind::Sym('·')) => "·",
                Some(TokenKind::Sym('×')) => "×",
                Some(TokenKind::Sym('÷')) => "÷",
                _ => break,
            };
            self.pos += 1;
            let right = self.implicit()?;
            left = AstNode::infix(symbol, left, right);
        }
        Ok(left)
    }

    fn starts_factor(&self) -> bool {
        match self.peek_kind() {
            Some(
                TokenKind::Letter(_)
                | TokenKind::Number(_)
                | TokenKind::Function(_)
                | TokenKind::LargeOp(_)
                | TokenKind::Frac
                | TokenKind::Sqrt
                | TokenKind::Roman(_)
                | TokenKind::Wildcard(_),
            ) => true,
            Some(TokenKind::Sym(c)) => matches!(c, '(' | '{'),
            _ => false,
        }
    }

    fn implicit(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.factor()?;
        while self.starts_factor() {
            let right = self.factor()?;
            left = AstNode::infix(IMPLICIT_TIMES, left, right);
        }
        Ok(left)
    }

    fn factor(&mut self) -> Result<AstNode, ParseError> {
        match self.peek_kind().cloned() {
            Some(TokenKind::Function(name)) => {
                self.pos += 1;
                let head = self.scripts(AstNode::ident(name))?;
                let arguments = if self.is_sym('(') {
                    let open = self.offset();
                    self.pos += 1;
                    let mut args = vec![self.relation()?];
                    while self.eat_sym(',') {
                        args.push(self.relation()?);
                    }
                    if !self.eat_sym(')') {
                        return Err(ParseError::new(open, "closing parenthesis"));
                    }
                    args
                } else if self.starts_factor() {
                    vec![self.factor()?]
                } else {
                    return Err(self.error_here("function argument"));
                };
                Ok(AstNode::apply(head, arguments))
            }
            Some(TokenKind::LargeOp(symbol)) => {
                self.pos += 1;
                let (lower, upper) = self.collect_scripts()?;
                let body = self.implicit()?;
                if lower.is_none() && upper.is_none() {
                    Ok(AstNode::prefix(symbol, vec![body]))
                } else {
                    let empty = || AstNode::Sequence { items: Vec::new() };
                    Ok(AstNode::prefix(
                        symbol,
                        vec![lower.unwrap_or_else(empty), upper.unwrap_or_else(empty), body],
                    ))
                }
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<AstNode, ParseError> {
        let base = self.primary()?;
        let mut node = self.scripts(base)?;
        while self.eat_sym('!') {
            node = AstNode::postfix("!", node);
        }
        Ok(node)
    }

    fn collect_scripts(&mut self) -> Result<(Option<AstNode>, Option<AstNode>), ParseError> {
        let mut sub = None;
        let mut sup = None;
        loop {
            let (slot, what) = if self.is_sym('_') {
                (&mut sub, "subscript")
            } else if self.is_sym('^') {
                (&mut sup, "superscript")
            } else {
                break;
            };
            let at = self.offset();
            if slot.is_some() {
                return Err(ParseError::new(at, format!("a single {what}")));
            }
            self.pos += 1;
            let arg = self.script_argument()?;
            if what == "subscript" {
                sub = Some(arg);
            } else {
                sup = Some(arg);
            }
        }
        Ok((sub, sup))
    }

    /// Attaches `_` and `^` to `base`; both present gives `Sup(Sub(base, s), p)`.
    fn scripts(&mut self, base: AstNode) -> Result<AstNode, ParseError> {
        let mut node = base;
        loop {
            if matches!(self.peek_kind(), Some(TokenKind::Prime)) {
                match &mut node {
                    AstNode::Identifier { name } => {
                        name.push('′');
                        self.pos += 1;
                        continue;
                    }
                    _ => return Err(self.error_here("identifier before prime")),
                }
            }
            break;
        }
        let (sub, sup) = self.collect_scripts()?;
        if let Some(s) = sub {
            node = AstNode::sub(node, s);
        }
        if let Some(p) = sup {
            node = AstNode::sup(node, p);
        }
        Ok(node)
    }

    fn script_argument(&mut self) -> Result<AstNode, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here("script argument"));
        };
        match tok.kind {
            TokenKind::Sym('{') => self.group('{', '}', "closing brace"),
            TokenKind::Number(lexeme) => {
                if lexeme.contains('.') {
                    return Err(ParseError::new(tok.offset, "braces around decimal script"));
                }
                // TeX takes a single character as an unbraced script
                let (first, rest) = lexeme.split_at(1);
                if rest.is_empty() {
                    self.pos += 1;
                } else {
                    self.tokens[self.pos] = Token {
                        kind: TokenKind::Number(rest.to_string()),
                        offset: tok.offset + 1,
                    };
                }
                Ok(AstNode::number(first))
            }
            TokenKind::Letter(name) | TokenKind::Roman(name) => {
                self.pos += 1;
                Ok(AstNode::ident(name))
            }
            TokenKind::Wildcard(tag) => {
                self.pos += 1;
                Ok(AstNode::wildcard(tag))
            }
            _ => Err(self.error_here("script argument")),
        }
    }

    fn group(&mut self, open: char, close: char, what: &str) -> Result<AstNode, ParseError> {
        let start = self.offset();
        debug_assert!(self.is_sym(open));
        self.pos += 1;
        if self.is_sym(close) {
            return Err(self.error_here("expression"));
        }
        let inner = match self.sequence() {
            Ok(inner) => inner,
            // ran off the end: report the unmatched opener
            Err(_) if self.peek().is_none() => return Err(ParseError::new(start, what)),
            Err(e) => return Err(e),
        };
        if !self.eat_sym(close) {
            return Err(ParseError::new(start, what));
        }
        Ok(inner)
    }

    fn primary(&mut self) -> Result<AstNode, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here("expression"));
        };
        match tok.kind {
            TokenKind::Letter(name) | TokenKind::Roman(name) => {
                self.pos += 1;
                Ok(AstNode::ident(name))
            }
            TokenKind::Number(lexeme) => {
                self.pos += 1;
                Ok(AstNode::number(lexeme))
            }
            TokenKind::Wildcard(tag) => {
                self.pos += 1;
                Ok(AstNode::wildcard(tag))
            }
            TokenKind::Sym('(') => self.group('(', ')', "closing parenthesis"),
            TokenKind::Sym('{') => self.group('{', '}', "closing brace"),
            TokenKind::Frac => {
                self.pos += 1;
                let num = self.braced_argument()?;
                let den = self.braced_argument()?;
                Ok(AstNode::infix(FRACTION, num, den))
            }
            TokenKind::Sqrt => {
                self.pos += 1;
                let index = if self.is_sym('[') {
                    Some(self.group('[', ']', "closing bracket")?)
                } else {
                    None
                };
                let radicand = self.braced_argument()?;
                let mut operands = vec![radicand];
                operands.extend(index);
                Ok(AstNode::prefix(SQRT, operands))
            }
            _ => Err(self.error_here("expression")),
        }
    }

    fn braced_argument(&mut self) -> Result<AstNode, ParseError> {
        if self.is_sym('{') {
            self.group('{', '}', "closing brace")
        } else {
            // `\frac12` style single-token arguments
            self.script_argument()
        }
    }
}
