//! JSON form of kernel specs.
//!
//! ```json
//! {"family": "power_disc", "s": 1.0}
//! {"family": "product_polydisc", "factors": [{"family": "power_disc", "s": 1}, {"family": "power_disc", "s": 1}]}
//! {"family": "normalized", "wrap": {"family": "power_disc", "s": 1}, "base": [[0.5, 0.0]]}
//! ```
//!
//! Complex numbers are written either as a plain number or as `[re, im]`.
//! Every object may carry an optional `"label"`. Unknown fields are rejected.

use std::path::Path;

use serde_json::{json, Map, Value};

use super::{series_power, Family, KernelSpec};
use crate::poly::Poly;
use crate::{Domain, DomainPoint, Error, Result, C64};

/// Reads and validates a spec file.
pub fn load_spec(path: impl AsRef<Path>) -> Result<KernelSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::SpecParse {
        path: path.display().to_string(),
        line: None,
        message: e.to_string(),
    })?;
    parse_spec(&text)
}

/// Parses a spec from JSON text.
pub fn parse_spec(text: &str) -> Result<KernelSpec> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::SpecParse {
        path: "$".into(),
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    let spec = from_value(&value, "$")?;
    Ok(spec)
}

/// Writes `spec` as pretty-printed JSON.
pub fn save_spec(spec: &KernelSpec, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, spec_to_string(spec))?;
    Ok(())
}

pub fn spec_to_string(spec: &KernelSpec) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(spec)).expect("serializable");
    s.push('\n');
    s
}

pub fn complex_to_value(c: C64) -> Value {
    if c.im == 0.0 {
        json!(c.re)
    } else {
        json!([c.re, c.im])
    }
}

pub fn to_value(spec: &KernelSpec) -> Value {
    let mut obj = match spec.family() {
        Family::PowerDisc { s } => json!({"family": "power_disc", "s": s}),
        Family::DiagonalSeries { coeffs } => json!({"family": "diagonal_series", "coefficients": coeffs}),
        Family::PowerBall { s, dim } => json!({"family": "power_ball", "s": s, "dim": dim}),
        Family::ProductPolydisc { factors } => {
            json!({"family": "product_polydisc", "factors": factors.iter().map(to_value).collect::<Vec<_>>()})
        }
        Family::MatrixJet { inner, order, direction } => json!({
            "family": "matrix_jet",
            "wrap": to_value(inner),
            "order": order,
            "direction": direction.iter().map(|c| complex_to_value(*c)).collect::<Vec<_>>(),
        }),
        Family::FormalPower { base, t, .. } => json!({"family": "formal_power", "wrap": to_value(base), "t": t}),
        Family::Normalized { inner, base } => json!({
            "family": "normalized",
            "wrap": to_value(inner),
            "base": base.coords().iter().map(|c| complex_to_value(*c)).collect::<Vec<_>>(),
        }),
        Family::MobiusTransported { inner, alpha, s } => json!({
            "family": "mobius_transported",
            "wrap": to_value(inner),
            "alpha": complex_to_value(*alpha),
            "s": s,
        }),
        Family::Scaled { inner, c } => json!({"family": "scaled", "wrap": to_value(inner), "c": c}),
        Family::FrameScaled { inner, poly } => json!({
            "family": "frame_scaled",
            "wrap": to_value(inner),
            "poly": poly.coeffs().iter().map(|c| complex_to_value(*c)).collect::<Vec<_>>(),
        }),
        Family::Deflated { inner, order } => json!({"family": "deflated", "wrap": to_value(inner), "order": order}),
        Family::Product { factors } => {
            json!({"family": "product", "factors": factors.iter().map(to_value).collect::<Vec<_>>()})
        }
        Family::KTilde { inner } => json!({"family": "ktilde", "wrap": to_value(inner)}),
        Family::Flag { k0, k1 } => json!({"family": "flag", "k0": to_value(k0), "k1": to_value(k1)}),
    };
    let fresh = KernelSpec::new(spec.family().clone()).map(|s| s.label().to_string());
    if fresh.as_deref().ok() != Some(spec.label()) {
        obj.as_object_mut().expect("object").insert("label".into(), json!(spec.label()));
    }
    obj
}

fn err(path: &str, message: impl Into<String>) -> Error {
    Error::SpecParse { path: path.to_string(), line: None, message: message.into() }
}

struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: &'a str,
}

impl<'a> Obj<'a> {
    fn field(&self, key: &str) -> Result<&'a Value> {
        self.map.get(key).ok_or_else(|| err(self.path, format!("missing field \"{key}\"")))
    }

    fn sub(&self, key: &str) -> String {
        format!("{}.{key}", self.path)
    }

    fn f64(&self, key: &str) -> Result<f64> {
        self.field(key)?.as_f64().ok_or_else(|| err(&self.sub(key), "expected a number"))
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.f64(key)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(err(&self.sub(key), format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn usize(&self, key: &str) -> Result<usize> {
        self.field(key)?
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| err(&self.sub(key), "expected a non-negative integer"))
    }

    fn spec(&self, key: &str) -> Result<KernelSpec> {
        from_value(self.field(key)?, &self.sub(key))
    }

    fn specs(&self, key: &str) -> Result<Vec<KernelSpec>> {
        let arr = self.field(key)?.as_array().ok_or_else(|| err(&self.sub(key), "expected an array"))?;
        arr.iter()
            .enumerate()
            .map(|(i, v)| from_value(v, &format!("{}[{i}]", self.sub(key))))
            .collect()
    }

    fn complex(&self, key: &str) -> Result<C64> {
        complex_from_value(self.field(key)?, &self.sub(key))
    }

    fn complexes(&self, key: &str) -> Result<Vec<C64>> {
        let arr = self.field(key)?.as_array().ok_or_else(|| err(&self.sub(key), "expected an array"))?;
        arr.iter()
            .enumerate()
            .map(|(i, v)| complex_from_value(v, &format!("{}[{i}]", self.sub(key))))
            .collect()
    }
}

/// A complex number written as a number or `[re, im]`.
pub fn complex_from_value(v: &Value, path: &str) -> Result<C64> {
    if let Some(re) = v.as_f64() {
        return Ok(C64::new(re, 0.0));
    }
    if let Some([re, im]) = v.as_array().map(|a| a.as_slice()) {
        if let (Some(re), Some(im)) = (re.as_f64(), im.as_f64()) {
            return Ok(C64::new(re, im));
        }
    }
    Err(err(path, "expected a number or [re, im]"))
}

fn allowed(family: &str) -> Option<&'static [&'static str]> {
    Some(match family {
        "power_disc" => &["s"],
        "diagonal_series" => &["coefficients"],
        "power_ball" => &["s", "dim"],
        "product_polydisc" | "product" => &["factors"],
        "matrix_jet" => &["wrap", "order", "direction"],
        "formal_power" => &["wrap", "t"],
        "normalized" => &["wrap", "base"],
        "mobius_transported" => &["wrap", "alpha", "s"],
        "scaled" => &["wrap", "c"],
        "frame_scaled" => &["wrap", "poly"],
        "deflated" => &["wrap", "order"],
        "ktilde" => &["wrap"],
        "flag" => &["k0", "k1"],
        _ => return None,
    })
}

/// Builds a spec from a parsed JSON value; `path` prefixes error locations.
pub fn from_value(value: &Value, path: &str) -> Result<KernelSpec> {
    let map = value.as_object().ok_or_else(|| err(path, "expected an object"))?;
    let o = Obj { map, path };
    let family = o
        .field("family")?
        .as_str()
        .ok_or_else(|| err(&o.sub("family"), "expected a string"))?;
    let fields = allowed(family).ok_or_else(|| err(&o.sub("family"), format!("unknown family \"{family}\"")))?;
    for key in map.keys() {
        if key != "family" && key != "label" && !fields.contains(&key.as_str()) {
            return Err(err(&o.sub(key), format!("unknown field for family \"{family}\"")));
        }
    }
    let at = |e: Error| match e {
        Error::SpecParse { .. } => e,
        other => err(path, other.to_string()),
    };
    let spec = match family {
        "power_disc" => KernelSpec::power_disc(o.positive("s")?),
        "diagonal_series" => {
            let arr = o.field("coefficients")?.as_array().ok_or_else(|| err(&o.sub("coefficients"), "expected an array"))?;
            let mut coeffs = Vec::with_capacity(arr.len());
            for (i, v) in arr.iter().enumerate() {
                let p = format!("{}[{i}]", o.sub("coefficients"));
                let c = v.as_f64().ok_or_else(|| err(&p, "expected a number"))?;
                if c < 0.0 {
                    return Err(err(&p, format!("coefficients must be non-negative, got {c}")));
                }
                coeffs.push(c);
            }
            KernelSpec::diagonal_series(coeffs)
        }
        "power_ball" => KernelSpec::power_ball(o.positive("s")?, o.usize("dim")?),
        "product_polydisc" => KernelSpec::product_polydisc(o.specs("factors")?),
        "product" => KernelSpec::product(o.specs("factors")?),
        "matrix_jet" => {
            let inner = o.spec("wrap")?;
            let direction = if map.contains_key("direction") {
                o.complexes("direction")?
            } else {
                default_direction(inner.domain())
            };
            KernelSpec::matrix_jet(inner, o.usize("order")?, direction)
        }
        "formal_power" => series_power(&o.spec("wrap")?, o.positive("t")?),
        "normalized" => {
            let inner = o.spec("wrap")?;
            let base = DomainPoint::new(inner.domain(), o.complexes("base")?).map_err(|e| err(&o.sub("base"), e.to_string()))?;
            super::normalize_at(&inner, &base)
        }
        "mobius_transported" => {
            let s = o.f64("s")?;
            super::mobius_transport(&o.spec("wrap")?, o.complex("alpha")?, s)
        }
        "scaled" => KernelSpec::scaled(o.spec("wrap")?, o.positive("c")?),
        "frame_scaled" => KernelSpec::frame_scaled(o.spec("wrap")?, Poly::new(o.complexes("poly")?)),
        "deflated" => KernelSpec::deflated(o.spec("wrap")?, o.usize("order")? as u32),
        "ktilde" => KernelSpec::ktilde(o.spec("wrap")?),
        "flag" => KernelSpec::flag(o.spec("k0")?, o.spec("k1")?),
        _ => unreachable!("family checked above"),
    }
    .map_err(at)?;
    match map.get("label") {
        None => Ok(spec),
        Some(Value::String(l)) => Ok(spec.with_label(l.clone())),
        Some(_) => Err(err(&o.sub("label"), "expected a string")),
    }
}

/// The jet direction used when none is given: `∂/∂z` on the disc, the first
/// coordinate on the ball and `∂₁ - ∂₂` (the `(z₁ - z₂)/2` coordinate) on
/// the polydisc.
pub fn default_direction(domain: Domain) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); domain.dim()];
    v[0] = C64::new(1.0, 0.0);
    if let Domain::Polydisc(_) = domain {
        v[1] = C64::new(-1.0, 0.0);
    }
    v
}
