use super::MathError;
use std::fmt;

/// A coordinate chart: a name and an ordered list of variable names.
///
/// The variable order is the tie-break order for every enumeration.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chart {
    pub name: &'static str,
    pub vars: &'static [&'static str],
}

/// Matrix coordinates `(a, b, c, d)` of `T = [[a, b], [c, d]]`.
pub const ORDINARY: Chart = Chart {
    name: "ordinary",
    vars: &["a", "b", "c", "d"],
};

/// Logarithmic coordinates `(alpha, beta, gamma, delta)` with `T = exp X`.
pub const EXPONENTIAL: Chart = Chart {
    name: "exponential",
    vars: &["alpha", "beta", "gamma", "delta"],
};

/// Coordinates of `G x G`, used for coproduct checks.
pub const DOUBLED: Chart = Chart {
    name: "doubled",
    vars: &["a1", "b1", "c1", "d1", "a2", "b2", "c2", "d2"],
};

/// Displacements `T - I` from the identity matrix.
pub const DISPLACEMENT: Chart = Chart {
    name: "displacement",
    vars: &["ya", "yb", "yc", "yd"],
};

impl Chart {
    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn index_of(&self, var: &str) -> Result<usize, MathError> {
        self.vars
            .iter()
            .position(|v| *v == var)
            .ok_or_else(|| MathError::UnknownVariable {
                var: var.to_string(),
                chart: self.name.to_string(),
            })
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart({})", self.name)
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}
