use super::Formula;
use std::fmt;

// Precedence levels: 0 implication and query, 1 or, 2 and, 3 unary.
// `tail` means nothing follows inside the current parenthesis, so a binder
// may stay bare.
fn write(f: &Formula, level: u8, tail: bool, out: &mut String) {
    let open = |out: &mut String, need: bool| {
        if need {
            out.push('(');
        }
    };
    let close = |out: &mut String, need: bool| {
        if need {
            out.push(')');
        }
    };
    match f {
        Formula::Prop(p) => out.push_str(p),
        Formula::Var(x) => out.push_str(x),
        Formula::Bottom => out.push_str("false"),
        Formula::Implies(l, r) if **l == Formula::Bottom && **r == Formula::Bottom => {
            out.push_str("true")
        }
        Formula::Implies(l, r) if **r == Formula::Bottom => {
            out.push('~');
            write(l, 3, tail, out);
        }
        Formula::Implies(l, r) | Formula::Query(l, r) => {
            let need = level > 0;
            let inner_tail = tail || need;
            open(out, need);
            write(l, 1, false, out);
            if matches!(f, Formula::Query(..)) {
                out.push_str(" ? ");
                write(r, 1, inner_tail, out);
            } else {
                out.push_str(" -> ");
                write(r, 0, inner_tail, out);
            }
            close(out, need);
        }
        Formula::Or(l, r) | Formula::And(l, r) => {
            let (mine, sym) = if matches!(f, Formula::Or(..)) {
                (1, " | ")
            } else {
                (2, " & ")
            };
            let need = level > mine;
            let inner_tail = tail || need;
            open(out, need);
            write(l, mine, false, out);
            out.push_str(sym);
            write(r, mine + 1, inner_tail, out);
            close(out, need);
        }
        Formula::Box(g) => {
            out.push_str("[]");
            write(g, 3, tail, out);
        }
        Formula::Dia(g) => {
            out.push_str("<>");
            write(g, 3, tail, out);
        }
        Formula::LocalDia(g) => {
            out.push_str("<^>");
            write(g, 3, tail, out);
        }
        Formula::Mu(x, b) | Formula::Nu(x, b) => {
            let need = !tail;
            open(out, need);
            out.push_str(if matches!(f, Formula::Mu(..)) {
                "mu "
            } else {
                "nu "
            });
            out.push_str(x);
            out.push_str(". ");
            write(b, 0, true, out);
            close(out, need);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write(self, 0, true, &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::{parse, parse_internal, Formula};

    #[test]
    fn minimal_parentheses() {
        for s in [
            "p -> q -> r",
            "(p -> q) -> r",
            "a | b | c",
            "a | (b | c)",
            "[](p -> q) -> []p -> []q",
            "(mu X. []X) & p",
            "p & mu X. []X",
            "~~p",
            "~(p | q)",
            "true",
            "nu X. []X & mu Y. <>Y | X",
        ] {
            assert_eq!(parse(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn internal_round_trip() {
        for f in [
            Formula::query(
                Formula::implies(Formula::prop("p"), Formula::prop("q")),
                Formula::prop("r"),
            ),
            Formula::local_dia(Formula::or(Formula::prop("p"), Formula::prop("q"))),
        ] {
            assert_eq!(parse_internal(&f.to_string()).unwrap(), f);
        }
    }
}
