use super::Formula;

const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const PREFIX: u8 = 5;
const ATOMIC: u8 = 6;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => IFF,
        Formula::Implies(..) => IMPLIES,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        Formula::Not(_) | Formula::Know(..) => PREFIX,
        Formula::Atom(_) | Formula::Top | Formula::Bot => ATOMIC,
    }
}

fn child(out: &mut String, f: &Formula, parenthesize: bool) {
    if parenthesize {
        out.push('(');
        write(out, f);
        out.push(')');
    } else {
        write(out, f);
    }
}

fn binary(out: &mut String, a: &Formula, op: &str, b: &Formula, level: u8, right_assoc: bool) {
    let (pa, pb) = (precedence(a), precedence(b));
    let left_parens = if right_assoc { pa <= level } else { pa < level };
    let right_parens = if right_assoc { pb < level } else { pb <= level };
    child(out, a, left_parens);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    child(out, b, right_parens);
}

fn write(out: &mut String, f: &Formula) {
    match f {
        Formula::Atom(a) => out.push_str(a),
        Formula::Top => out.push_str("true"),
        Formula::Bot => out.push_str("false"),
        Formula::Not(g) => {
            out.push('~');
            child(out, g, precedence(g) < PREFIX);
        }
        Formula::Know(i, g) => {
            out.push('K');
            out.push_str(&i.to_string());
            out.push(' ');
            child(out, g, precedence(g) < PREFIX);
        }
        Formula::And(a, b) => binary(out, a, "&", b, AND, false),
        Formula::Or(a, b) => binary(out, a, "|", b, OR, false),
        Formula::Implies(a, b) => binary(out, a, "->", b, IMPLIES, true),
        Formula::Iff(a, b) => binary(out, a, "<->", b, IFF, false),
    }
}

pub(super) fn render(f: &Formula) -> String {
    let mut out = String::new();
    write(&mut out, f);
    out
}
