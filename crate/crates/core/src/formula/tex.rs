use super::ast::*;
use super::parser::command_for_char;

/// Writes TeX that parses back to a structurally equal tree.
pub fn to_tex(node: &AstNode) -> String {
    let mut out = String::new();
    write(node, &mut out);
    out
}

fn write_at(node: &AstNode, min_prec: u8, out: &mut String) {
    if precedence(node) < min_prec {
        out.push('{');
        write(node, out);
        out.push('}');
    } else {
        write(node, out);
    }
}

fn braced(node: &AstNode, out: &mut String) {
    out.push('{');
    write(node, out);
    out.push('}');
}

fn identifier(name: &str, out: &mut String) {
    let primes = name.chars().filter(|&c| c == '′').count();
    let stem: String = name.chars().filter(|&c| c != '′').collect();
    if is_function_name(&stem) {
        out.push_str("\\mathrm{");
        out.push_str(&stem);
        out.push('}');
    } else if stem.chars().count() == 1 {
        let c = stem.chars().next().unwrap_or('?');
        match command_for_char(c) {
            Some(cmd) => {
                out.push('\\');
                out.push_str(cmd);
                out.push(' ');
            }
            None => out.push(c),
        }
    } else {
        out.push_str("\\mathrm{");
        out.push_str(&stem);
        out.push('}');
    }
    for _ in 0..primes {
        out.push('\'');
    }
}

fn write(node: &AstNode, out: &mut String) {
    match node {
        AstNode::Identifier { name } => identifier(name, out),
        AstNode::Number { lexeme } => out.push_str(lexeme),
        AstNode::Wildcard { tag } => {
            out.push('?');
            out.push_str(tag);
        }
        AstNode::Sequence { items } => {
            if items.len() == 1 {
                write(&items[0], out);
                return;
            }
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_at(item, PREC_RELATION, out);
            }
        }
        AstNode::Relation { symbol, left, right } => {
            write_at(left, PREC_RELATION, out);
            out.push(' ');
            out.push_str(relation_tex(symbol));
            out.push(' ');
            write_at(right, PREC_ADDITIVE, out);
        }
        AstNode::Apply { function, arguments } => {
            function_head(function, out);
            out.push('(');
            for (i, arg) in arguments.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                if matches!(arg, AstNode::Sequence { items } if items.len() != 1) {
                    braced(arg, out);
                } else {
                    write_at(arg, PREC_RELATION, out);
                }
            }
            out.push(')');
        }
        AstNode::Sub { base, script } => {
            write_at(base, PREC_ATOM, out);
            out.push('_');
            braced(script, out);
        }
        AstNode::Sup { base, script } => {
            write_at(base, PREC_ATOM, out);
            out.push('^');
            braced(script, out);
        }
        AstNode::Operator {
            symbol,
            operands,
            fixity,
        } => operator(symbol, operands, *fixity, out),
    }
}

fn function_head(function: &AstNode, out: &mut String) {
    match function {
        AstNode::Identifier { name } => {
            out.push('\\');
            out.push_str(name);
            out.push(' ');
        }
        AstNode::Sub { base, script } => {
            function_head(base, out);
            out.push('_');
            braced(script, out);
        }
        AstNode::Sup { base, script } => {
            function_head(base, out);
            out.push('^');
            braced(script, out);
        }
        other => braced(other, out),
    }
}

fn operator(symbol: &str, operands: &[AstNode], fixity: Fixity, out: &mut String) {
    match fixity {
        Fixity::Infix if operands.len() == 2 && symbol == FRACTION => {
            out.push_str("\\frac");
            braced(&operands[0], out);
            braced(&operands[1], out);
        }
        Fixity::Infix if operands.len() == 2 => {
            let (lmin, rmin) = infix_operand_precedence(symbol);
            write_at(&operands[0], lmin, out);
            out.push(' ');
            out.push_str(infix_tex(symbol));
            out.push(' ');
            write_at(&operands[1], rmin, out);
        }
        Fixity::Prefix if symbol == SQRT => {
            out.push_str("\\sqrt");
            if let Some(index) = operands.get(1) {
                out.push('[');
                write(index, out);
                out.push(']');
            }
            braced(&operands[0], out);
        }
        Fixity::Prefix if is_large_operator_symbol(symbol) => {
            out.push_str(large_op_tex(symbol));
            let body = if operands.len() == 3 {
                for (mark, bound) in [('_', &operands[0]), ('^', &operands[1])] {
                    if !matches!(bound, AstNode::Sequence { items } if items.is_empty()) {
                        out.push(mark);
                        braced(bound, out);
                    }
                }
                &operands[2]
            } else {
                &operands[0]
            };
            out.push(' ');
            write_at(body, PREC_LARGE_OP, out);
        }
        Fixity::Prefix => {
            out.push_str(infix_tex(symbol));
            for operand in operands {
                write_at(operand, PREC_SIGNED, out);
            }
        }
        Fixity::Postfix => {
            for operand in operands {
                write_at(operand, PREC_POSTFIX, out);
            }
            out.push_str(symbol);
        }
        Fixity::Infix => {
            // degenerate arities do not come out of the parser; keep them readable
            out.push_str("\\mathrm{op}(");
            for (i, operand) in operands.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write(operand, out);
            }
            out.push(')');
        }
    }
}

fn infix_tex(symbol: &str) -> &str {
    match symbol {
        IMPLICIT_TIMES => "",
        MINUS => "-",
        "·" => "\\cdot",
        "×" => "\\times",
        "÷" => "\\div",
        "±" => "\\pm",
        "∓" => "\\mp",
        other => other,
    }
}

fn relation_tex(symbol: &str) -> &str {
    match symbol {
        "≤" => "\\leq",
        "≥" => "\\geq",
        "≠" => "\\neq",
        "≈" => "\\approx",
        "≡" => "\\equiv",
        "∼" => "\\sim",
        "→" => "\\to",
        "↦" => "\\mapsto",
        "∈" => "\\in",
        "∉" => "\\notin",
        "⊂" => "\\subset",
        "⊆" => "\\subseteq",
        other => other,
    }
}

fn large_op_tex(symbol: &str) -> &str {
    match symbol {
        "∑" => "\\sum",
        "∏" => "\\prod",
        "∫" => "\\int",
        "∬" => "\\iint",
        "∮" => "\\oint",
        "⋃" => "\\bigcup",
        "⋂" => "\\bigcap",
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_tex_formula;

    #[test]
    fn reparses_to_same_tree() {
        for src in [
            "S = \\pi r^2",
            "x^2 + y^2 = z^2",
            "\\frac{a+b}{c} - -d",
            "\\sum_{i=1}^{n} a_i b_i + 1",
            "\\sin^2 x + \\cos^2 x = 1",
            "(a+b)(c+d)",
            "\\sqrt[3]{x} \\cdot n!",
            "f'(x) \\leq \\max(a, b)",
            "a - (b - c)",
            "\\int_0^1 f(x) \\mathrm{d} x",
            "x_i^2, y",
        ] {
            let ast = parse_tex_formula(src).unwrap().root;
            let printed = to_tex(&ast);
            let again = parse_tex_formula(&printed)
                .unwrap_or_else(|e| panic!("{src} -> {printed}: {e}"))
                .root;
            assert_eq!(ast, again, "{src} -> {printed}");
        }
    }
}
