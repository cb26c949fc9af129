use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::parser::{parse_node, ParseError};

/// A formula whose leaves may be wildcards `?name`. Repeated tags must bind
/// equal subtrees; `?_` binds anything and records nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaPattern {
    pub root: AstNode,
    pub source: String,
}

impl FormulaPattern {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        Ok(FormulaPattern {
            root: parse_node(source, true)?,
            source: source.to_string(),
        })
    }

    pub fn from_node(root: AstNode) -> Self {
        let source = super::tex::to_tex(&root);
        FormulaPattern { root, source }
    }

    pub fn has_wildcards(&self) -> bool {
        self.root.has_wildcards()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    /// wildcard tag → bound subtree
    pub bindings: BTreeMap<String, AstNode>,
    /// pattern identifier → formula identifier
    pub renaming: BTreeMap<String, String>,
    pub location: NodePath,
}

/// Pre-order enumeration of every subtree with its path.
pub fn subterms(ast: &FormulaAst) -> Vec<(NodePath, &AstNode)> {
    subterms_of(&ast.root)
}

pub fn subterms_of(root: &AstNode) -> Vec<(NodePath, &AstNode)> {
    let mut out = Vec::new();
    collect(root, NodePath::root(), &mut out);
    out
}

fn collect<'a>(node: &'a AstNode, path: NodePath, out: &mut Vec<(NodePath, &'a AstNode)>) {
    let children = node.children();
    out.push((path.clone(), node));
    for (i, child) in children.into_iter().enumerate() {
        collect(child, path.child(i), out);
    }
}

/// Every node of `ast` (root or subterm) where `pattern` matches.
pub fn match_pattern(pattern: &FormulaPattern, ast: &FormulaAst) -> Vec<MatchResult> {
    subterms(ast)
        .into_iter()
        .filter_map(|(path, node)| {
            match_at(&pattern.root, node).map(|(bindings, renaming)| MatchResult {
                bindings,
                renaming,
                location: path,
            })
        })
        .collect()
}

type Bindings = BTreeMap<String, AstNode>;
type Renaming = BTreeMap<String, String>;

/// Matches `pattern` against `node` exactly at the node.
pub fn match_at(pattern: &AstNode, node: &AstNode) -> Option<(Bindings, Renaming)> {
    let mut state = MatchState::default();
    state
        .unify(pattern, node)
        .then_some((state.bindings, state.renaming))
}

#[derive(Default)]
struct MatchState {
    bindings: Bindings,
    renaming: Renaming,
    // formula identifier → pattern identifier, keeps the renaming injective
    inverse: BTreeMap<String, String>,
}

impl MatchState {
    fn unify(&mut self, pattern: &AstNode, node: &AstNode) -> bool {
        match (pattern, node) {
            (AstNode::Wildcard { tag }, _) => {
                if tag == ANONYMOUS_WILDCARD {
                    return true;
                }
                match self.bindings.get(tag) {
                    Some(bound) => bound == node,
                    None => {
                        self.bindings.insert(tag.clone(), node.clone());
                        true
                    }
                }
            }
            (AstNode::Identifier { name: p }, AstNode::Identifier { name: n }) => {
                match (is_variable_name(p), is_variable_name(n)) {
                    (false, _) | (_, false) => p == n,
                    (true, true) => self.rename(p, n),
                }
            }
            (AstNode::Number { lexeme: p }, AstNode::Number { lexeme: n }) => p == n,
            (
                AstNode::Operator {
                    symbol: ps,
                    operands: po,
                    fixity: pf,
                },
                AstNode::Operator {
                    symbol: ns,
                    operands: no,
                    fixity: nf,
                },
            ) => ps == ns && pf == nf && self.unify_all(po.iter(), no.iter(), po.len(), no.len()),
            (AstNode::Apply { .. }, AstNode::Apply { .. })
            | (AstNode::Sequence { .. }, AstNode::Sequence { .. })
            | (AstNode::Sub { .. }, AstNode::Sub { .. })
            | (AstNode::Sup { .. }, AstNode::Sup { .. }) => {
                let (pc, nc) = (pattern.children(), node.children());
                let (pl, nl) = (pc.len(), nc.len());
                self.unify_all(pc.into_iter(), nc.into_iter(), pl, nl)
            }
            (
                AstNode::Relation {
                    symbol: ps,
                    left: pl,
                    right: pr,
                },
                AstNode::Relation {
                    symbol: ns,
                    left: nl,
                    right: nr,
                },
            ) => ps == ns && self.unify(pl, nl) && self.unify(pr, nr),
            _ => false,
        }
    }

    fn unify_all<'a>(
        &mut self,
        pattern: impl Iterator<Item = &'a AstNode>,
        node: impl Iterator<Item = &'a AstNode>,
        plen: usize,
        nlen: usize,
    ) -> bool {
        plen == nlen && pattern.zip(node).all(|(p, n)| self.unify(p, n))
    }

    fn rename(&mut self, from: &str, to: &str) -> bool {
        match (self.renaming.get(from), self.inverse.get(to)) {
            (Some(existing), _) => existing == to,
            (None, Some(_)) => false,
            (None, None) => {
                self.renaming.insert(from.to_string(), to.to_string());
                self.inverse.insert(to.to_string(), from.to_string());
                true
            }
        }
    }
}
