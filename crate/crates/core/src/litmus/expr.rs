use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use super::{Pid, Reg, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

/// Integer expression over register values. Predicates are expressions
/// interpreted as true iff nonzero.
///
/// `Reg` refers to a register of the executing process; `Qual` names a
/// register of a specific process and only appears in final-state
/// predicates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Value),
    Reg(Reg),
    Qual(Pid, Reg),
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    /// Evaluates with unbounded integers; `None` if a register is unknown.
    pub fn eval_raw(&self, env: &dyn Fn(Option<Pid>, Reg) -> Option<Value>) -> Option<i64> {
        Some(match self {
            Expr::Const(v) => *v as i64,
            Expr::Reg(r) => env(None, *r)? as i64,
            Expr::Qual(p, r) => env(Some(*p), *r)? as i64,
            Expr::Un(op, e) => {
                let v = e.eval_raw(env)?;
                match op {
                    UnOp::Not => (v == 0) as i64,
                    UnOp::Neg => -v,
                }
            }
            Expr::Bin(op, l, r) => {
                let a = l.eval_raw(env)?;
                let b = r.eval_raw(env)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    // Total: division and remainder by zero yield zero.
                    BinOp::Div => {
                        if b == 0 {
                            0
                        } else {
                            a.div_euclid(b)
                        }
                    }
                    BinOp::Mod => {
                        if b == 0 {
                            0
                        } else {
                            a.rem_euclid(b)
                        }
                    }
                    BinOp::Eq => (a == b) as i64,
                    BinOp::Ne => (a != b) as i64,
                    BinOp::Lt => (a < b) as i64,
                    BinOp::Le => (a <= b) as i64,
                    BinOp::Gt => (a > b) as i64,
                    BinOp::Ge => (a >= b) as i64,
                    BinOp::And => (a != 0 && b != 0) as i64,
                    BinOp::Or => (a != 0 || b != 0) as i64,
                }
            }
        })
    }

    /// Evaluates into the data domain `{0, .., dmax}` by wrapping.
    pub fn eval(&self, env: &dyn Fn(Option<Pid>, Reg) -> Option<Value>, dmax: Value) -> Option<Value> {
        self.eval_raw(env).map(|v| wrap(v, dmax))
    }

    pub fn eval_local(&self, regs: &[Option<Value>], dmax: Value) -> Option<Value> {
        self.eval(&|_, r| regs.get(r.idx()).copied().flatten(), dmax)
    }

    pub fn holds_local(&self, regs: &[Option<Value>]) -> Option<bool> {
        self.eval_raw(&|_, r| regs.get(r.idx()).copied().flatten())
            .map(|v| v != 0)
    }

    /// Registers read by the expression, in first-occurrence order.
    pub fn regs(&self) -> Vec<Reg> {
        let mut out = Vec::new();
        self.collect_regs(&mut out);
        out
    }

    fn collect_regs(&self, out: &mut Vec<Reg>) {
        match self {
            Expr::Const(_) | Expr::Qual(..) => {}
            Expr::Reg(r) => {
                if !out.contains(r) {
                    out.push(*r)
                }
            }
            Expr::Un(_, e) => e.collect_regs(out),
            Expr::Bin(_, l, r) => {
                l.collect_regs(out);
                r.collect_regs(out);
            }
        }
    }

    pub fn max_const(&self) -> Value {
        match self {
            Expr::Const(v) => *v,
            Expr::Reg(_) | Expr::Qual(..) => 0,
            Expr::Un(_, e) => e.max_const(),
            Expr::Bin(_, l, r) => l.max_const().max(r.max_const()),
        }
    }
}

pub fn wrap(v: i64, dmax: Value) -> Value {
    v.rem_euclid(dmax as i64 + 1) as Value
}

/// Renders an expression with explicit parentheses around every compound
/// subterm, using the supplied register and process namers.
pub struct ExprDisplay<'a> {
    pub expr: &'a Expr,
    pub reg_name: &'a dyn Fn(Option<Pid>, Reg) -> alloc::string::String,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(
            e: &Expr,
            names: &dyn Fn(Option<Pid>, Reg) -> alloc::string::String,
            f: &mut fmt::Formatter<'_>,
            top: bool,
        ) -> fmt::Result {
            match e {
                Expr::Const(v) => write!(f, "{v}"),
                Expr::Reg(r) => write!(f, "{}", names(None, *r)),
                Expr::Qual(p, r) => write!(f, "{}", names(Some(*p), *r)),
                Expr::Un(op, inner) => {
                    f.write_str(match op {
                        UnOp::Not => "!",
                        UnOp::Neg => "-",
                    })?;
                    go(inner, names, f, false)
                }
                Expr::Bin(op, l, r) => {
                    if !top {
                        f.write_str("(")?;
                    }
                    go(l, names, f, false)?;
                    write!(f, " {} ", op.symbol())?;
                    go(r, names, f, false)?;
                    if !top {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self.expr, self.reg_name, f, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(regs: &[Option<Value>]) -> impl Fn(Option<Pid>, Reg) -> Option<Value> + '_ {
        move |_, r| regs[r.idx()]
    }

    #[test]
    fn wraps_into_domain() {
        let e = Expr::bin(BinOp::Add, Expr::Reg(Reg(0)), Expr::Const(2));
        assert_eq!(e.eval(&env(&[Some(3)]), 3), Some(1));
        let neg = Expr::Un(UnOp::Neg, Box::new(Expr::Const(1)));
        assert_eq!(neg.eval(&env(&[]), 3), Some(3));
    }

    #[test]
    fn unknown_register_propagates() {
        let e = Expr::bin(BinOp::Or, Expr::Const(1), Expr::Reg(Reg(0)));
        assert_eq!(e.eval_raw(&env(&[None])), None);
    }

    #[test]
    fn division_by_zero_is_total() {
        let e = Expr::bin(BinOp::Div, Expr::Const(3), Expr::Const(0));
        assert_eq!(e.eval_raw(&env(&[])), Some(0));
    }
}
