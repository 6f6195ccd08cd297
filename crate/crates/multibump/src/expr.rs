//! Closed-form expressions from configuration files.
//!
//! Spatial expressions see `x1 .. xN` (also `x`, `y`, `z`) and `r = |x|`;
//! scalar expressions see `s`. Both see `pi` and `e` and the `math::*`
//! builtins of `evalexpr`. Integer literals use integer arithmetic, so write
//! `1.0 / 3.0`, not `1 / 3`.

use std::fmt;
use std::sync::Arc;

use evalexpr::{build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node, Value};
use multibump_core::energy::ScalarFn1;
use multibump_core::grid::ScalarFn;

use crate::AppError;

type Val = Value<DefaultNumericTypes>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scope {
    Space(usize),
    Scalar,
}

/// A parsed expression with its variables checked.
#[derive(Clone)]
pub struct Expression {
    source: String,
    tree: Arc<Node<DefaultNumericTypes>>,
    scope: Scope,
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expression").field("source", &self.source).finish_non_exhaustive()
    }
}

fn slot(scope: Scope, name: &str) -> Option<usize> {
    match (name, scope) {
        ("pi", _) => Some(0),
        ("e", _) => Some(1),
        ("s", Scope::Scalar) | ("r", Scope::Space(_)) => Some(2),
        (_, Scope::Space(dim)) => {
            let k = match name {
                "x" => 1,
                "y" => 2,
                "z" => 3,
                _ => name.strip_prefix('x')?.parse().ok()?,
            };
            (k >= 1 && k <= dim).then_some(2 + k)
        }
        _ => None,
    }
}

struct Bindings<'a> {
    scope: Scope,
    values: &'a [Val],
}

impl Context for Bindings<'_> {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&Val> {
        slot(self.scope, identifier).map(|k| &self.values[k])
    }

    fn call_function(&self, identifier: &str, _argument: &Val) -> EvalexprResult<Val, DefaultNumericTypes> {
        Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string()))
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        false
    }

    fn set_builtin_functions_disabled(&mut self, _disabled: bool) -> EvalexprResult<(), DefaultNumericTypes> {
        Err(EvalexprError::BuiltinFunctionsCannotBeDisabled)
    }
}

impl Expression {
    fn parse(source: &str, scope: Scope) -> Result<Self, AppError> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| AppError::Expression { source_text: source.to_string(), message: e.to_string() })?;
        if let Some(unknown) = tree.iter_variable_identifiers().find(|v| slot(scope, v).is_none()) {
            return Err(AppError::Expression {
                source_text: source.to_string(),
                message: format!("unknown variable `{unknown}`"),
            });
        }
        let expr = Expression { source: source.to_string(), tree: Arc::new(tree), scope };
        let probe = match scope {
            Scope::Space(dim) => expr.try_point(&vec![0.0; dim]),
            Scope::Scalar => expr.try_scalar(0.0),
        };
        probe.map_err(|message| AppError::Expression { source_text: source.to_string(), message })?;
        Ok(expr)
    }

    /// Expression in `x1 .. xN` and `r`.
    pub fn spatial(source: &str, dim: usize) -> Result<Self, AppError> {
        Self::parse(source, Scope::Space(dim))
    }

    /// Expression in `s`.
    pub fn scalar(source: &str) -> Result<Self, AppError> {
        Self::parse(source, Scope::Scalar)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn run(&self, values: &[Val]) -> Result<f64, String> {
        let ctx = Bindings { scope: self.scope, values };
        self.tree.eval_number_with_context(&ctx).map_err(|e| e.to_string())
    }

    fn try_point(&self, x: &[f64]) -> Result<f64, String> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut values = Vec::with_capacity(3 + x.len());
        values.extend([Val::Float(std::f64::consts::PI), Val::Float(std::f64::consts::E), Val::Float(r)]);
        values.extend(x.iter().map(|&v| Val::Float(v)));
        self.run(&values)
    }

    fn try_scalar(&self, s: f64) -> Result<f64, String> {
        self.run(&[Val::Float(std::f64::consts::PI), Val::Float(std::f64::consts::E), Val::Float(s)])
    }

    /// Value at a point; evaluation errors give NaN.
    pub fn at_point(&self, x: &[f64]) -> f64 {
        self.try_point(x).unwrap_or(f64::NAN)
    }

    /// Value at a scalar; evaluation errors give NaN.
    pub fn at(&self, s: f64) -> f64 {
        self.try_scalar(s).unwrap_or(f64::NAN)
    }

    pub fn into_spatial_fn(self) -> ScalarFn {
        Arc::new(move |x: &[f64]| self.at_point(x))
    }

    pub fn into_scalar_fn(self) -> ScalarFn1 {
        Arc::new(move |s: f64| self.at(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spatial_variables() {
        let e = Expression::spatial("x1 * 2.0 + y - r", 2).unwrap();
        assert_eq!(e.at_point(&[3.0, 4.0]), 6.0 + 4.0 - 5.0);
        let e = Expression::spatial("math::sqrt(math::abs(x2 - 0.5))", 2).unwrap();
        assert_eq!(e.at_point(&[0.0, 0.75]), 0.5);
    }

    #[test]
    fn scalar_variables_and_constants() {
        let e = Expression::scalar("if(s <= 1.0, 10.0 * math::abs(s) * (1.0 - s), 0.0)").unwrap();
        assert_eq!(e.at(0.5), 2.5);
        assert_eq!(e.at(2.0), 0.0);
        let e = Expression::scalar("pi * s").unwrap();
        assert_eq!(e.at(1.0), std::f64::consts::PI);
    }

    #[test]
    fn unknown_variables_are_rejected() {
        assert!(Expression::spatial("x3", 2).is_err());
        assert!(Expression::scalar("x").is_err());
        assert!(Expression::spatial("x1 +", 2).is_err());
    }

    #[test]
    fn integer_results_are_numbers() {
        let e = Expression::scalar("2").unwrap();
        assert_eq!(e.at(0.0), 2.0);
    }
}
