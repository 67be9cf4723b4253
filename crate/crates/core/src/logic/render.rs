//! Pretty-printing back into the concrete grammar.
//!
//! `parse_formula(render_formula(f), sig)` returns `f` structurally, provided
//! all identifiers in `f` are lexically valid and constants match `sig`.

use super::Formula;

// Binding strength: quantifiers 0, <-> 1, -> 2, | 3, & 4, ! 5, atoms 6.
fn level(f: &Formula) -> u8 {
    match f {
        Formula::ForAll(_, _) | Formula::Exists(_, _) => 0,
        Formula::Iff(_, _) => 1,
        Formula::Implies(_, _) => 2,
        Formula::Or(_, _) => 3,
        Formula::And(_, _) => 4,
        Formula::Not(_) => 5,
        Formula::True | Formula::False | Formula::Equal(_, _) | Formula::Rel(_, _) => 6,
    }
}

fn render(f: &Formula, min: u8, out: &mut String) {
    if level(f) < min {
        out.push('(');
        render(f, 0, out);
        out.push(')');
        return;
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Equal(l, r) => {
            out.push_str(&format!("{l} = {r}"));
        }
        Formula::Rel(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&a.to_string());
            }
            out.push(')');
        }
        Formula::Not(g) => {
            out.push('!');
            // equations read badly unparenthesized after `!`
            if matches!(**g, Formula::Equal(_, _)) {
                out.push('(');
                render(g, 0, out);
                out.push(')');
            } else {
                render(g, 5, out);
            }
        }
        Formula::And(l, r) => {
            render(l, 4, out);
            out.push_str(" & ");
            render(r, 5, out);
        }
        Formula::Or(l, r) => {
            render(l, 3, out);
            out.push_str(" | ");
            render(r, 4, out);
        }
        Formula::Implies(l, r) => {
            render(l, 3, out);
            out.push_str(" -> ");
            render(r, 2, out);
        }
        Formula::Iff(l, r) => {
            render(l, 2, out);
            out.push_str(" <-> ");
            render(r, 1, out);
        }
        Formula::ForAll(v, g) => {
            out.push_str("forall ");
            out.push_str(v);
            out.push_str(". ");
            render(g, 0, out);
        }
        Formula::Exists(v, g) => {
            out.push_str("exists ");
            out.push_str(v);
            out.push_str(". ");
            render(g, 0, out);
        }
    }
}

pub fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    render(f, 0, &mut out);
    out
}
