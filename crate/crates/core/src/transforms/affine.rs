use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::{DomainSpec, Field, Hyper, Jet2, Scalar, ScalarField};

/// `ψ(w) = φ(T w + b)` with `T` of shape m×n (m = source dimension).
/// `ψ_ww = Tᵀ φ_uu T`.
pub fn affine(field: &ScalarField, t: &DMatrix<f64>, b: &[f64]) -> Result<ScalarField> {
    let m = field.dim();
    if t.nrows() != m || b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: if t.nrows() != m { t.nrows() } else { b.len() },
        });
    }
    if t.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("affine coefficients must be finite".into()));
    }
    let n = t.ncols();
    let domain = match monomial_box(field.domain(), t, b) {
        Some((lo, hi)) => DomainSpec::new(lo, hi)?,
        None => DomainSpec::unbounded(n),
    };
    let source = field.clone();
    let (tc, bc) = (t.clone(), b.to_vec());
    let domain = domain.with_predicate(format!("affine preimage of {}", field.provenance()), move |w| {
        source.contains(&apply(&tc, &bc, w))
    });
    let reference = preimage_admissible(t, b, field.reference_point(), &domain)?;
    let labels = (1..=n).map(|i| format!("w{i}")).collect();
    Ok(ScalarField::new(AffineField {
        source: field.clone(),
        t: t.clone(),
        b: b.to_vec(),
        labels,
        domain,
        provenance: format!("affine({})", field.provenance()),
        reference,
        factor: 1.0,
        kinetic: 0,
    }))
}

/// `ψ(w) = φ(s ⊙ w)` for signs `s_i = ±1`.
pub fn sign_flip(field: &ScalarField, signs: &[f64]) -> Result<ScalarField> {
    if signs.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: signs.len(),
        });
    }
    if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
        return Err(Error::InvalidParameter("sign_flip entries must be +1 or -1".into()));
    }
    let t = DMatrix::from_diagonal(&DVector::from_column_slice(signs));
    let mut out = affine(field, &t, &vec![0.0; signs.len()])?;
    let labels: Vec<String> = field
        .labels()
        .iter()
        .zip(signs)
        .map(|(l, s)| if *s < 0.0 { format!("−{l}") } else { l.clone() })
        .collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    out = super::relabel(&out, &refs)?;
    Ok(out)
}

/// `ψ = c φ`.
pub fn scale(field: &ScalarField, factor: f64) -> Result<ScalarField> {
    if !(factor != 0.0 && factor.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale factor {factor} must be nonzero and finite")));
    }
    let m = field.dim();
    Ok(ScalarField::new(AffineField {
        source: field.clone(),
        t: DMatrix::identity(m, m),
        b: vec![0.0; m],
        labels: field.labels().to_vec(),
        domain: field.domain().clone(),
        provenance: format!("{factor}·{}", field.provenance()),
        reference: field.reference_point().to_vec(),
        factor,
        kinetic: 0,
    }))
}

/// `ψ(x, v̄) = φ(x) + ½|v̄|²` with `dim` appended velocity variables.
pub fn add_kinetic(field: &ScalarField, dim: usize) -> Result<ScalarField> {
    let m = field.dim();
    if m + dim > crate::field::MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "{} variables exceed the jet capacity {}",
            m + dim,
            crate::field::MAX_DIM
        )));
    }
    let mut lower = field.domain().lower().to_vec();
    let mut upper = field.domain().upper().to_vec();
    lower.extend(std::iter::repeat_n(f64::NEG_INFINITY, dim));
    upper.extend(std::iter::repeat_n(f64::INFINITY, dim));
    let source = field.clone();
    let domain = DomainSpec::new(lower, upper)?
        .with_predicate(field.domain().description().to_string(), move |x| source.contains(&x[..m]));
    let mut labels = field.labels().to_vec();
    labels.extend((1..=dim).map(|i| format!("v{i} [m/s]")));
    let mut reference = field.reference_point().to_vec();
    reference.extend(std::iter::repeat_n(0.0, dim));
    Ok(ScalarField::new(AffineField {
        source: field.clone(),
        t: DMatrix::identity(m, m),
        b: vec![0.0; m],
        labels,
        domain,
        provenance: format!("{} + ½|v|²", field.provenance()),
        reference,
        factor: 1.0,
        kinetic: dim,
    }))
}

fn apply(t: &DMatrix<f64>, b: &[f64], w: &[f64]) -> Vec<f64> {
    (0..t.nrows())
        .map(|i| b[i] + (0..t.ncols()).map(|j| t[(i, j)] * w[j]).sum::<f64>())
        .collect()
}

/// Box of `w` when each row and column of `T` has one nonzero entry.
fn monomial_box(domain: &DomainSpec, t: &DMatrix<f64>, b: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    if t.nrows() != t.ncols() {
        return None;
    }
    let n = t.ncols();
    let mut lo = vec![f64::NEG_INFINITY; n];
    let mut hi = vec![f64::INFINITY; n];
    let mut seen = vec![false; n];
    for i in 0..n {
        let nz: Vec<usize> = (0..n).filter(|&j| t[(i, j)] != 0.0).collect();
        if nz.len() != 1 || seen[nz[0]] {
            return None;
        }
        let j = nz[0];
        seen[j] = true;
        let c = t[(i, j)];
        let a = (domain.lower()[i] - b[i]) / c;
        let z = (domain.upper()[i] - b[i]) / c;
        lo[j] = a.min(z);
        hi[j] = a.max(z);
    }
    Some((lo, hi))
}

/// Least-squares solution of `T w + b = u`, required to be exact.
pub(super) fn preimage(t: &DMatrix<f64>, b: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let w = least_squares(t, b, u)?;
    let back = apply(t, b, &w);
    let scale = u.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let err = back.iter().zip(u).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale;
    if err > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "point {u:?} is not in the range of the affine map"
        )));
    }
    Ok(w)
}

fn least_squares(t: &DMatrix<f64>, b: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let rhs = DVector::from_iterator(u.len(), u.iter().zip(b).map(|(x, y)| x - y));
    let w = t
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidParameter(format!("affine preimage: {e}")))?;
    Ok(w.iter().copied().collect())
}

fn preimage_admissible(t: &DMatrix<f64>, b: &[f64], u: &[f64], domain: &DomainSpec) -> Result<Vec<f64>> {
    let w = least_squares(t, b, u)?;
    super::check_reference(domain, &w, "affine")?;
    Ok(w)
}

struct AffineField {
    source: ScalarField,
    t: DMatrix<f64>,
    b: Vec<f64>,
    labels: Vec<String>,
    domain: DomainSpec,
    provenance: String,
    reference: Vec<f64>,
    factor: f64,
    kinetic: usize,
}

impl Field for AffineField {
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
        let vars = Hyper::variables(w);
        let n = self.t.ncols();
        let inner: Vec<Hyper> = (0..self.t.nrows())
            .map(|i| {
                let mut acc = vars[0].constant_like(self.b[i]);
                for j in 0..n {
                    if self.t[(i, j)] != 0.0 {
                        acc = acc + vars[j] * self.t[(i, j)];
                    }
                }
                acc
            })
            .collect();
        let u: Vec<f64> = inner.iter().map(Scalar::value).collect();
        let mut out = self.source.jet(&u)?.compose(&inner) * self.factor;
        for v in &vars[n..n + self.kinetic] {
            out = out + *v * *v * 0.5;
        }
        Ok(Jet2::from_hyper(&out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::builtin::half_squared_norm;

    #[test]
    fn identity_and_singular_maps() {
        let f = half_squared_norm(2);
        let same = affine(&f, &DMatrix::identity(2, 2), &[0.0, 0.0]).unwrap();
        assert_eq!(same.jet(&[0.3, 0.4]).unwrap(), f.jet(&[0.3, 0.4]).unwrap());
        let rank1 = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let g = affine(&f, &rank1, &[0.0, 0.0]).unwrap();
        let h = g.jet(&[0.2, -0.1]).unwrap().hessian;
        assert!((h - DMatrix::from_element(2, 2, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn kinetic_and_scale() {
        let f = half_squared_norm(1);
        let e = add_kinetic(&f, 2).unwrap();
        let j = e.jet(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(j.value, 7.0);
        let neg = scale(&e, -1.0).unwrap().jet(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(neg.hessian, -j.hessian);
    }
}
