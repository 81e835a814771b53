use std::fmt::Write;

use crate::syntax::*;

const INDENT: &str = "   ";

/// Renders a program in canonical form. Parsing the output yields the same AST (up to spans).
pub fn pretty_print(program: &Program) -> String {
    let mut items = Vec::new();
    for r in &program.records {
        let mut out = format!("type {} is record\n", r.name);
        for f in &r.fields {
            let _ = writeln!(out, "{INDENT}{} : {};", f.name, f.ty);
        }
        out.push_str("end record;\n");
        items.push(out);
    }
    for p in &program.procedures {
        let mut out = format!("procedure {}", p.name);
        if !p.params.is_empty() {
            let params: Vec<_> = p.params.iter().map(|prm| format!("{} : {} {}", prm.name, prm.mode, prm.ty)).collect();
            let _ = write!(out, " ({})", params.join("; "));
        }
        out.push_str(" is\n");
        for l in &p.locals {
            let _ = writeln!(out, "{INDENT}{} : {};", l.name, l.ty);
        }
        out.push_str("begin\n");
        out.push_str(&print_stmts(&p.body, 1));
        let _ = writeln!(out, "end {};", p.name);
        items.push(out);
    }
    items.join("\n")
}

pub fn print_stmts(stmts: &[Stmt], depth: usize) -> String {
    let mut out = String::new();
    for s in stmts {
        print_stmt(&mut out, s, depth);
    }
    out
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    match &stmt.kind {
        StmtKind::Assign { lhs, rhs } => {
            let _ = writeln!(out, "{pad}{lhs} := {};", print_expr(rhs));
        }
        StmtKind::Alloc { lhs, ty } => {
            let _ = writeln!(out, "{pad}{lhs} := new {ty};");
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            let _ = writeln!(out, "{pad}if {} then", print_expr(cond));
            out.push_str(&print_stmts(then_branch, depth + 1));
            if !else_branch.is_empty() {
                let _ = writeln!(out, "{pad}else");
                out.push_str(&print_stmts(else_branch, depth + 1));
            }
            let _ = writeln!(out, "{pad}end if;");
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "{pad}while {} loop", print_expr(cond));
            out.push_str(&print_stmts(body, depth + 1));
            let _ = writeln!(out, "{pad}end loop;");
        }
        StmtKind::Call { callee, args } => {
            if args.is_empty() {
                let _ = writeln!(out, "{pad}{callee};");
            } else {
                let args: Vec<_> = args.iter().map(print_expr).collect();
                let _ = writeln!(out, "{pad}{callee}({});", args.join(", "));
            }
        }
    }
}

pub fn print_expr(expr: &Expr) -> String {
    match &expr.kind {
        ExprKind::Path(p) => p.to_string(),
        ExprKind::Lit(Literal::Int(v)) => v.to_string(),
        ExprKind::Lit(Literal::Real(v)) => print_real(*v),
        ExprKind::Lit(Literal::Bool(b)) => b.to_string(),
        ExprKind::AddressOf(p) => format!("{p}'Access"),
        ExprKind::Null => "null".to_string(),
        ExprKind::Binary(op, l, r) => {
            let left = operand(l, *op, false);
            let right = operand(r, *op, true);
            format!("{left} {} {right}", op.symbol())
        }
    }
}

fn operand(e: &Expr, parent: BinOp, right: bool) -> String {
    let text = print_expr(e);
    let ExprKind::Binary(op, _, _) = &e.kind else { return text };
    let needs_parens = op.precedence() < parent.precedence()
        || (op.precedence() == parent.precedence() && (right || op.is_comparison()));
    if needs_parens {
        format!("({text})")
    } else {
        text
    }
}

/// Shortest round-tripping decimal with a mandatory fractional part.
fn print_real(v: f64) -> String {
    let text = format!("{v}");
    if text.contains('.') {
        text
    } else {
        format!("{text}.0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn empty_main_is_canonical() {
        let prog = parse("procedure   Main is begin\n end Main ;").unwrap();
        assert_eq!(pretty_print(&prog), "procedure Main is\nbegin\nend Main;\n");
    }

    #[test]
    fn parenthesizes_only_when_needed() {
        let e = Expr::binary(
            BinOp::Sub,
            Expr::int(1),
            Expr::binary(BinOp::Sub, Expr::int(2), Expr::int(3)),
        );
        assert_eq!(print_expr(&e), "1 - (2 - 3)");
        let e = Expr::binary(BinOp::Mul, Expr::binary(BinOp::Add, Expr::int(1), Expr::int(2)), Expr::int(3));
        assert_eq!(print_expr(&e), "(1 + 2) * 3");
        let e = Expr::binary(BinOp::Add, Expr::binary(BinOp::Add, Expr::int(1), Expr::int(2)), Expr::int(3));
        assert_eq!(print_expr(&e), "1 + 2 + 3");
        let cmp = Expr::binary(BinOp::Lt, Expr::int(1), Expr::int(2));
        let e = Expr::binary(BinOp::Eq, cmp, Expr::boolean(true));
        assert_eq!(print_expr(&e), "(1 < 2) = true");
    }

    #[test]
    fn reals_keep_a_fraction() {
        assert_eq!(print_real(3.0), "3.0");
        assert_eq!(print_real(3.25), "3.25");
        assert_eq!(print_real(1e21), "1000000000000000000000.0");
    }

    #[test]
    fn round_trips_statements() {
        let src = "type List is record
   Flag : Boolean;
   Key : access Integer;
   Next : access List;
end record;

procedure P (A : in List; B : in out List; C : out access List) is
   X : Integer;
begin
   if A.Flag and X < 3 then
      X := X + 1;
   else
      C := new List;
   end if;
   while X > 0 loop
      X := X - 1;
   end loop;
   P(A, B, C);
   C.all.Key := B.Key.all'Access;
end P;
";
        let prog = parse(src).unwrap();
        assert_eq!(pretty_print(&prog), src);
    }
}
