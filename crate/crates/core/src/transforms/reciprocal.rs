use crate::error::{Error, Result};
use crate::field::{DomainSpec, Field, Hyper, Jet2, Scalar, ScalarField};

/// The reciprocal change of variables `u_k ↦ 1/u_k`, `u_i ↦ u_i/u_k`
/// (1-based pivot `k`). It is its own inverse.
pub fn reciprocal_map(u: &[f64], pivot: usize) -> Vec<f64> {
    let k = pivot - 1;
    let inv = 1.0 / u[k];
    u.iter()
        .enumerate()
        .map(|(i, &x)| if i == k { inv } else { x * inv })
        .collect()
}

/// Reciprocal involution `ψ(w) = w_k φ(T_R(w))` with 1-based pivot `k`.
///
/// The pivot must be one-signed on the source box. Jets are propagated by
/// the chain rule through `T_R`.
pub fn reciprocal(field: &ScalarField, pivot: usize) -> Result<ScalarField> {
    let m = field.dim();
    if pivot == 0 || pivot > m {
        return Err(Error::InvalidParameter(format!("pivot {pivot} outside 1..={m}")));
    }
    let k = pivot - 1;
    let (lo, hi) = (field.domain().lower()[k], field.domain().upper()[k]);
    let positive = if lo >= 0.0 {
        true
    } else if hi <= 0.0 {
        false
    } else {
        return Err(Error::PivotSignViolation { pivot });
    };
    let recip = |x: f64| if x == 0.0 { if positive { f64::INFINITY } else { f64::NEG_INFINITY } } else { 1.0 / x };
    let mut lower = vec![f64::NEG_INFINITY; m];
    let mut upper = vec![f64::INFINITY; m];
    let (a, b) = (recip(hi), recip(lo));
    lower[k] = a.min(b);
    upper[k] = a.max(b);
    let source = field.clone();
    let domain = DomainSpec::new(lower, upper)?.with_predicate(
        format!("reciprocal image of {}", field.provenance()),
        move |w| source.contains(&reciprocal_map(w, pivot)),
    );
    let reference = reciprocal_map(field.reference_point(), pivot);
    super::check_reference(&domain, &reference, "reciprocal")?;
    let labels = field
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let l = l.split(' ').next().unwrap_or(l);
            let p = field.labels()[k].split(' ').next().unwrap_or("");
            if i == k {
                format!("1/{l}")
            } else {
                format!("{l}/{p}")
            }
        })
        .collect();
    Ok(ScalarField::new(ReciprocalField {
        source: field.clone(),
        pivot,
        labels,
        domain,
        provenance: format!("reciprocal[{pivot}]({})", field.provenance()),
        reference,
    }))
}

struct ReciprocalField {
    source: ScalarField,
    pivot: usize,
    labels: Vec<String>,
    domain: DomainSpec,
    provenance: String,
    reference: Vec<f64>,
}

impl Field for ReciprocalField {
    fn labels(&self) -> &[String] {
        &self.labels
    }
    fn domain(&self) -> &DomainSpec {
        &self.domain
    }
    fn provenance(&self) -> &str {
        &self.provenance
    }
    fn reference_point(&self) -> &[f64] {
        &self.reference
    }
    fn eval(&self, w: &[f64]) -> Result<Jet2> {
        let k = self.pivot - 1;
        let vars = Hyper::variables(w);
        let inv = vars[k].recip();
        let inner: Vec<Hyper> = vars
            .iter()
            .enumerate()
            .map(|(i, x)| if i == k { inv } else { *x * inv })
            .collect();
        let u: Vec<f64> = inner.iter().map(Scalar::value).collect();
        let phi = self.source.jet(&u)?;
        Ok(Jet2::from_hyper(&(phi.compose(&inner) * vars[k])))
    }
}
