use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ast::*;

/// A formula with its variables renamed `v1, v2, …` in order of first
/// pre-order occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub skeleton: AstNode,
    /// original name → positional name
    pub renaming: BTreeMap<String, String>,
}

impl CanonicalForm {
    /// Unambiguous textual key of the skeleton.
    pub fn key(&self) -> String {
        structural_key(&self.skeleton)
    }

    /// Stable 64-bit digest of [`CanonicalForm::key`].
    pub fn digest(&self) -> u64 {
        key_digest(&self.key())
    }
}

pub fn normalize(ast: &FormulaAst) -> CanonicalForm {
    normalize_node(&ast.root)
}

pub fn normalize_node(node: &AstNode) -> CanonicalForm {
    let mut renaming = BTreeMap::new();
    let mut skeleton = node.clone();
    rename(&mut skeleton, &mut renaming);
    CanonicalForm { skeleton, renaming }
}

fn rename(node: &mut AstNode, renaming: &mut BTreeMap<String, String>) {
    if let AstNode::Identifier { name } = node {
        if is_variable_name(name) {
            let next = renaming.len() + 1;
            let positional = renaming
                .entry(name.clone())
                .or_insert_with(|| format!("v{next}"))
                .clone();
            *name = positional;
        }
        return;
    }
    for child in node.children_mut() {
        rename(child, renaming);
    }
}

pub fn key_digest(key: &str) -> u64 {
    let digest = Sha256::digest(key.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(bytes)
}

/// Prefix rendering with explicit arities, e.g. `(o+i 2 (i:v1) (i:v2))`.
pub fn structural_key(node: &AstNode) -> String {
    let mut out = String::new();
    write_key(node, &mut out);
    out
}

fn write_key(node: &AstNode, out: &mut String) {
    match node {
        AstNode::Identifier { name } => {
            let _ = write!(out, "(i:{name})");
        }
        AstNode::Number { lexeme } => {
            let _ = write!(out, "(n:{lexeme})");
        }
        AstNode::Wildcard { tag } => {
            let _ = write!(out, "(w:{tag})");
        }
        other => {
            let (tag, symbol) = match other {
                AstNode::Operator { symbol, fixity, .. } => {
                    let f = match fixity {
                        Fixity::Prefix => "p",
                        Fixity::Infix => "i",
                        Fixity::Postfix => "s",
                    };
                    (format!("o{f}"), symbol.as_str())
                }
                AstNode::Apply { .. } => ("a".to_string(), ""),
                AstNode::Relation { symbol, .. } => ("r".to_string(), symbol.as_str()),
                AstNode::Sequence { .. } => ("q".to_string(), ""),
                AstNode::Sub { .. } => ("_".to_string(), ""),
                AstNode::Sup { .. } => ("^".to_string(), ""),
                _ => unreachable!(),
            };
            let children = other.children();
            let _ = write!(out, "({tag}{symbol} {}", children.len());
            for child in children {
                out.push(' ');
                write_key(child, out);
            }
            out.push(')');
        }
    }
}
