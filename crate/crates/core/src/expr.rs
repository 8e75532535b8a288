//! Inline scalar expressions for configuration files.
//!
//! Expressions use the usual notation: `sin(s)`, `exp(-s)`, `y^2/2`, `pi`.
//! Integer literals are read as floats so `1/2` is one half.

use std::sync::Arc;

use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use regex::Regex;

use crate::error::{GeoError, Result};
use crate::geometry::{ScalarField, Vec2};
use crate::surfaces::Fn1;

const FUNCTIONS: &[&str] = &[
    "asinh", "acosh", "atanh", "atan2", "asin", "acos", "atan", "sinh", "cosh", "tanh", "sin", "cos", "tan", "exp",
    "ln", "log", "sqrt", "cbrt", "abs", "hypot", "pow",
];

/// A compiled expression in a fixed list of variables.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    vars: Vec<String>,
    node: Arc<Node<DefaultNumericTypes>>,
}

fn rewrite(src: &str) -> String {
    let names = FUNCTIONS.join("|");
    let calls = Regex::new(&format!(r"\b({names})\s*\(")).expect("static regex");
    let out = calls.replace_all(src, "math::$1(");
    let pi = Regex::new(r"\bpi\b").expect("static regex");
    let out = pi.replace_all(&out, format!("{:?}", std::f64::consts::PI).as_str());
    // integer literals become floats; skip digits inside identifiers or decimals
    let ints = Regex::new(r"(^|[^\w.])(\d+)([^\w.]|$)").expect("static regex");
    let mut s = out.into_owned();
    loop {
        let next = ints.replace_all(&s, "${1}${2}.0${3}").into_owned();
        if next == s {
            break;
        }
        s = next;
    }
    s
}

impl Expr {
    /// Compile `src` with the given variable names.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self> {
        let node = build_operator_tree::<DefaultNumericTypes>(&rewrite(src))
            .map_err(|e| GeoError::Argument(format!("cannot parse expression `{src}`: {e}")))?;
        let expr = Self { source: src.to_string(), vars: vars.iter().map(|v| v.to_string()).collect(), node: Arc::new(node) };
        let unknown: Vec<String> = expr
            .node
            .iter_variable_identifiers()
            .filter(|id| !expr.vars.iter().any(|v| v == id))
            .map(str::to_string)
            .collect();
        if !unknown.is_empty() {
            return Err(GeoError::Argument(format!("expression `{src}` uses unknown variables {unknown:?}")));
        }
        Ok(expr)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        for (name, v) in self.vars.iter().zip(values) {
            ctx.set_value(name.clone(), Value::Float(*v))
                .map_err(|e| GeoError::Argument(e.to_string()))?;
        }
        self.node
            .eval_number_with_context(&ctx)
            .map_err(|e| GeoError::Numerical(format!("evaluating `{}`: {e}", self.source)))
    }

    /// As a function of two variables; evaluation errors give NaN.
    pub fn into_scalar_field(self) -> ScalarField {
        Arc::new(move |p: Vec2| self.eval(&p).unwrap_or(f64::NAN))
    }

    /// As a function of one variable; evaluation errors give NaN.
    pub fn into_fn1(self) -> Fn1 {
        Arc::new(move |s: f64| self.eval(&[s]).unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functions_constants_and_division() {
        let e = Expr::parse("sin(s)^2 + cos(s)^2 + 1/2", &["s"]).unwrap();
        assert!((e.eval(&[0.7]).unwrap() - 1.5).abs() < 1e-15);
        let e = Expr::parse("exp(-x) * pi + y", &["x", "y"]).unwrap();
        assert!((e.eval(&[0.0, 2.0]).unwrap() - (std::f64::consts::PI + 2.0)).abs() < 1e-15);
        let e = Expr::parse("-(x^2 + y^2)/2", &["x", "y"]).unwrap();
        assert_eq!(e.eval(&[1.0, 2.0]).unwrap(), -2.5);
        let e = Expr::parse("x2 + 1.25", &["x2"]).unwrap();
        assert_eq!(e.eval(&[1.0]).unwrap(), 2.25);
    }

    #[test]
    fn unknown_variables_and_syntax_errors() {
        assert!(Expr::parse("x + z", &["x", "y"]).is_err());
        assert!(Expr::parse("x + (", &["x"]).is_err());
    }

    #[test]
    fn scalar_field_adapter() {
        let f = Expr::parse("ln(y)", &["x", "y"]).unwrap().into_scalar_field();
        assert!((f([0.0, std::f64::consts::E]) - 1.0).abs() < 1e-15);
    }
}
