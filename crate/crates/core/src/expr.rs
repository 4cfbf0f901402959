//! Closed-form expressions used for outflow traces and initial profiles.

use std::fmt;

use crate::error::{Error, Result};

/// A parsed closed-form expression over a fixed set of named variables.
#[derive(Clone)]
pub struct FieldExpr {
    field: String,
    text: String,
    vars: Vec<&'static str>,
    expr: meval::Expr,
}

impl FieldExpr {
    /// Parses `text` and checks that it only references `vars` (plus builtins such as `pi`).
    pub fn parse(field: &str, text: &str, vars: &[&'static str]) -> Result<Self> {
        let err = |message: String| Error::Expression {
            field: field.to_string(),
            source_text: text.to_string(),
            message,
        };
        let expr: meval::Expr = text.parse().map_err(|e: meval::Error| err(e.to_string()))?;
        let parsed = FieldExpr {
            field: field.to_string(),
            text: text.to_string(),
            vars: vars.to_vec(),
            expr,
        };
        // probe once so unknown variables fail at parse time
        let probe: Vec<f64> = vec![0.25; vars.len()];
        parsed.eval(&probe)?;
        Ok(parsed)
    }

    /// A constant expression.
    pub fn constant(field: &str, value: f64, vars: &[&'static str]) -> Self {
        Self::parse(field, &format!("{value:?}"), vars).expect("numeric literal parses")
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Evaluates with `values` bound positionally to the declared variables.
    pub fn eval(&self, values: &[f64]) -> Result<f64> {
        let mut ctx = meval::Context::new();
        for (name, &v) in self.vars.iter().zip(values) {
            ctx.var(*name, v);
        }
        self.expr.eval_with_context(ctx).map_err(|e| Error::Expression {
            field: self.field.clone(),
            source_text: self.text.clone(),
            message: e.to_string(),
        })
    }

    /// Centered finite-difference partial derivative in variable `var`.
    pub fn partial(&self, var: usize, values: &[f64]) -> Result<f64> {
        let h = 1e-5 * values[var].abs().max(1.0);
        let mut plus = values.to_vec();
        let mut minus = values.to_vec();
        plus[var] += h;
        minus[var] -= h;
        Ok((self.eval(&plus)? - self.eval(&minus)?) / (plus[var] - minus[var]))
    }
}

impl fmt::Debug for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldExpr")
            .field("field", &self.field)
            .field("text", &self.text)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_variable_rejected() {
        assert!(FieldExpr::parse("P", "1 + z", &["t", "x"]).is_err());
        assert!(FieldExpr::parse("P", "1 + sin(x) * exp(-t) + pi", &["t", "x"]).is_ok());
    }

    #[test]
    fn partial_of_linear_is_exact() {
        let e = FieldExpr::parse("Theta", "1 + 0.3 * t", &["t", "x"]).unwrap();
        let d = e.partial(0, &[0.2, 1.0]).unwrap();
        assert!((d - 0.3).abs() < 1e-10);
    }
}
