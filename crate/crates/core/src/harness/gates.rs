use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::HarnessError;
use crate::qasm::{format_angle, parse_angle};
use crate::qmath::Unitary2;

/// A gate named on the command line or in a config file.
///
/// Grammar: `id | h | x | z | r(<angle>) | u3(<angle>,<angle>,<angle>)`,
/// where angles use the QASM expression syntax (`pi`, `*`, `/`, unary minus).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateSpec {
    Id,
    H,
    X,
    Z,
    /// `diag(1, e^{iθ})`.
    R(f64),
    U3(f64, f64, f64),
}

impl GateSpec {
    pub fn unitary(&self) -> Unitary2 {
        match *self {
            GateSpec::Id => Unitary2::identity(),
            GateSpec::H => Unitary2::hadamard(),
            GateSpec::X => Unitary2::pauli_x(),
            GateSpec::Z => Unitary2::pauli_z(),
            GateSpec::R(theta) => Unitary2::phase(theta),
            GateSpec::U3(t, p, l) => Unitary2::from_u3(t, p, l),
        }
    }
}

fn call_args<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
}

impl FromStr for GateSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |why: String| HarnessError::UnknownGate(format!("{s}: {why}"));
        let angle = |t: &str| parse_angle(t).map_err(|e| bad(e.to_string()));
        match s {
            "id" | "i" => return Ok(GateSpec::Id),
            "h" => return Ok(GateSpec::H),
            "x" => return Ok(GateSpec::X),
            "z" => return Ok(GateSpec::Z),
            _ => {}
        }
        if let Some(args) = call_args(s, "r") {
            return Ok(GateSpec::R(angle(args)?));
        }
        if let Some(args) = call_args(s, "u3") {
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() != 3 {
                return Err(bad("u3 takes three angles".into()));
            }
            return Ok(GateSpec::U3(angle(parts[0])?, angle(parts[1])?, angle(parts[2])?));
        }
        Err(bad("expected one of id, h, x, z, r(angle), u3(a,b,c)".into()))
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GateSpec::Id => f.write_str("id"),
            GateSpec::H => f.write_str("h"),
            GateSpec::X => f.write_str("x"),
            GateSpec::Z => f.write_str("z"),
            GateSpec::R(t) => write!(f, "r({})", format_angle(t)),
            GateSpec::U3(a, b, c) => write!(
                f,
                "u3({},{},{})",
                format_angle(a),
                format_angle(b),
                format_angle(c)
            ),
        }
    }
}

impl Serialize for GateSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GateSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parses_names() {
        assert_eq!("id".parse::<GateSpec>().unwrap(), GateSpec::Id);
        assert_eq!(" h ".parse::<GateSpec>().unwrap(), GateSpec::H);
        match "r(2*pi/3)".parse::<GateSpec>().unwrap() {
            GateSpec::R(t) => assert!((t - 2.0 * PI / 3.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            "u3(pi/2, 0, pi)".parse::<GateSpec>().unwrap(),
            GateSpec::U3(..)
        ));
    }

    #[test]
    fn rejects_unknown() {
        assert!(matches!("cz".parse::<GateSpec>(), Err(HarnessError::UnknownGate(_))));
        assert!("r()".parse::<GateSpec>().is_err());
        assert!("u3(1,2)".parse::<GateSpec>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for g in [GateSpec::Id, GateSpec::R(2.0943951023931953), GateSpec::U3(0.1, 0.2, 0.3)] {
            let back: GateSpec = g.to_string().parse().unwrap();
            assert!(back.unitary().max_abs_diff(&g.unitary()) < 1e-13);
        }
    }
}
