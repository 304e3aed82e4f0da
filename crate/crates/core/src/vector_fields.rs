//! The lift of a family of vector fields `V_1, ..., V_d` on `R^m` to
//! differential operators indexed by tensors:
//! `F(e_{i1} ... e_{ik}) = V_{i1} V_{i2} ... V_{ik}`, each `V_i` acting as the
//! derivation `g -> Dg[V_i]`.
//!
//! Operators are evaluated on truncated Taylor jets, which works for any field
//! that can report its derivative tensors. Polynomial systems additionally get
//! an exact symbolic route: each word operator applied to the identity is
//! precomputed as a polynomial vector field.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::poly::{CompiledMap, Polynomial};
use crate::tensor::{TensorElement, Word, DEFAULT_TOL};

/// A smooth vector field on `R^m` that can report derivative tensors.
pub trait SmoothField: Send + Sync {
    fn state_dim(&self) -> usize;

    /// Order-`r` derivative tensor at `x`, flattened row-major as
    /// `[c][i_1]...[i_r]` (`m^(r+1)` entries). Order 0 is the field value.
    fn derivative(&self, x: &[f64], order: usize) -> Vec<f64>;

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.derivative(x, 0));
    }
}

/// Vector field with polynomial components.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField {
    components: Vec<Polynomial>,
}

impl PolynomialField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let m = components.len();
        if m == 0 {
            return Err(invalid("polynomial field needs at least one component"));
        }
        if let Some(p) = components.iter().find(|p| p.nvars() != m) {
            return Err(invalid(format!(
                "component has {} variables, state dimension is {m}",
                p.nvars()
            )));
        }
        Ok(PolynomialField { components })
    }

    /// `x -> A x` for a square matrix given by rows.
    pub fn linear(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let components = rows
            .iter()
            .map(|row| {
                if row.len() != m {
                    return Err(invalid("linear field needs a square matrix"));
                }
                let mut p = Polynomial::zero(m);
                for (j, a) in row.iter().enumerate() {
                    let mut e = vec![0; m];
                    e[j] = 1;
                    p.add_term(e, *a);
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    /// Applies the derivation `g -> sum_c V^c d_c g` to a polynomial.
    pub fn derive(&self, g: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(g.nvars());
        for (c, v) in self.components.iter().enumerate() {
            let dg = g.derivative(c);
            if !dg.is_zero() {
                out.add_assign_scaled(&v.mul(&dg), 1.0);
            }
        }
        out
    }
}

impl SmoothField for PolynomialField {
    fn state_dim(&self) -> usize {
        self.components.len()
    }

    fn derivative(&self, x: &[f64], order: usize) -> Vec<f64> {
        let m = self.components.len();
        let mut out = Vec::with_capacity(m.pow(order as u32 + 1));
        for comp in &self.components {
            let jet = comp.shift(x, order as u32);
            for idx in 0..m.pow(order as u32) {
                let alpha = multi_index(m, order, idx);
                let factorial: f64 = alpha
                    .iter()
                    .map(|&a| (1..=a).map(f64::from).product::<f64>())
                    .product();
                out.push(jet.coeff(&alpha) * factorial);
            }
        }
        out
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.components) {
            *o = p.eval(x);
        }
    }
}

/// Exponent vector of the flat index sequence `idx` over `[0, m)^order`.
fn multi_index(m: usize, order: usize, mut idx: usize) -> Vec<u32> {
    let mut alpha = vec![0u32; m];
    for _ in 0..order {
        alpha[idx % m] += 1;
        idx /= m;
    }
    alpha
}

/// What an operator is applied to.
#[derive(Debug, Clone, Copy)]
pub enum Observable<'a> {
    /// The identity map; the result is a state point.
    Identity,
    /// A scalar test function; the result has one entry.
    Function(&'a Polynomial),
}

struct Inner {
    state_dim: usize,
    max_derivative: usize,
    fields: Vec<Arc<dyn SmoothField>>,
    /// `F(w) Id` for every word `w`, indexed `[level][word index]`.
    word_fields: Option<Vec<Vec<Vec<Polynomial>>>>,
}

/// The map `F` from the driving space `R^d` to vector fields on `R^m`.
#[derive(Clone)]
pub struct VectorFieldSystem {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for VectorFieldSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorFieldSystem")
            .field("driving_dim", &self.driving_dim())
            .field("state_dim", &self.inner.state_dim)
            .field("max_derivative", &self.inner.max_derivative)
            .field("polynomial", &self.inner.word_fields.is_some())
            .finish()
    }
}

impl VectorFieldSystem {
    /// Polynomial system with derivatives available up to `max_derivative`;
    /// operators of words up to length `max_derivative + 1` can be applied.
    pub fn polynomial(fields: Vec<PolynomialField>, max_derivative: usize) -> Result<Self> {
        let m = check_dims(fields.iter().map(|f| f.state_dim()))?;
        let d = fields.len();
        let max_len = max_derivative + 1;
        let mut levels: Vec<Vec<Vec<Polynomial>>> =
            vec![vec![(0..m).map(|c| Polynomial::variable(m, c)).collect()]];
        for k in 1..=max_len {
            let prev = &levels[k - 1];
            let mut cur = Vec::with_capacity(d * prev.len());
            for field in &fields {
                for suffix in prev {
                    cur.push(suffix.iter().map(|g| field.derive(g)).collect());
                }
            }
            levels.push(cur);
        }
        let fields = fields
            .into_iter()
            .map(|f| Arc::new(f) as Arc<dyn SmoothField>)
            .collect();
        Ok(VectorFieldSystem {
            inner: Arc::new(Inner {
                state_dim: m,
                max_derivative,
                fields,
                word_fields: Some(levels),
            }),
        })
    }

    /// System of arbitrary fields. Their derivative tensors are checked against
    /// central finite differences at each probe point.
    pub fn from_fields(
        fields: Vec<Arc<dyn SmoothField>>,
        max_derivative: usize,
        probes: &[Vec<f64>],
    ) -> Result<Self> {
        let m = check_dims(fields.iter().map(|f| f.state_dim()))?;
        let sys = VectorFieldSystem {
            inner: Arc::new(Inner {
                state_dim: m,
                max_derivative,
                fields,
                word_fields: None,
            }),
        };
        for x in probes {
            let err = sys.derivative_consistency(x, FD_STEP)?;
            if err > FD_TOL {
                return Err(invalid(format!(
                    "derivative tensors disagree with finite differences at {x:?} (error {err:e})"
                )));
            }
        }
        Ok(sys)
    }

    pub fn driving_dim(&self) -> usize {
        self.inner.fields.len()
    }

    pub fn state_dim(&self) -> usize {
        self.inner.state_dim
    }

    pub fn max_derivative(&self) -> usize {
        self.inner.max_derivative
    }

    pub fn is_polynomial(&self) -> bool {
        self.inner.word_fields.is_some()
    }

    pub fn field(&self, i: usize) -> &dyn SmoothField {
        self.inner.fields[i].as_ref()
    }

    /// `sum_i v_i V_i(x)`.
    pub fn eval_combination(&self, v: &[f64], x: &[f64], out: &mut [f64]) {
        let mut buf = vec![0.0; self.state_dim()];
        out.iter_mut().for_each(|o| *o = 0.0);
        for (f, vi) in self.inner.fields.iter().zip(v) {
            if *vi == 0.0 {
                continue;
            }
            f.eval(x, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += vi * b;
            }
        }
    }

    /// Largest discrepancy between each stored derivative tensor of order
    /// `r >= 1` and the central difference of the order `r - 1` tensor.
    pub fn derivative_consistency(&self, x: &[f64], h: f64) -> Result<f64> {
        let m = self.state_dim();
        if x.len() != m {
            return Err(invalid("probe point has the wrong dimension"));
        }
        let mut worst = 0.0f64;
        for f in &self.inner.fields {
            for r in 1..=self.inner.max_derivative {
                let exact = f.derivative(x, r);
                for j in 0..m {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[j] += h;
                    xm[j] -= h;
                    let (dp, dm) = (f.derivative(&xp, r - 1), f.derivative(&xm, r - 1));
                    for (flat, (a, b)) in dp.iter().zip(&dm).enumerate() {
                        let fd = (a - b) / (2.0 * h);
                        worst = worst.max((fd - exact[flat * m + j]).abs());
                    }
                }
            }
        }
        Ok(worst)
    }

    fn check_tensor(&self, a: &TensorElement) -> Result<usize> {
        if a.dim() != self.driving_dim() {
            return Err(Error::ShapeMismatch(
                a.dim(),
                a.level(),
                self.driving_dim(),
                a.level(),
            ));
        }
        let deg = a.degree().unwrap_or(0);
        if deg > self.inner.max_derivative + 1 {
            return Err(invalid(format!(
                "word length {deg} needs field derivatives of order {}, only {} available",
                deg - 1,
                self.inner.max_derivative
            )));
        }
        Ok(deg)
    }

    /// Taylor jets of every field at `x`, truncated at degree `order`.
    fn field_jets(&self, x: &[f64], order: usize) -> Vec<Vec<Polynomial>> {
        let m = self.state_dim();
        self.inner
            .fields
            .iter()
            .map(|f| {
                let mut comps = vec![Polynomial::zero(m); m];
                for r in 0..=order {
                    let tensor = f.derivative(x, r);
                    let per_comp = m.pow(r as u32);
                    for (c, comp) in comps.iter_mut().enumerate() {
                        for idx in 0..per_comp {
                            // each monomial once: only nondecreasing index sequences
                            let seq = index_sequence(m, r, idx);
                            if seq.windows(2).any(|w| w[0] > w[1]) {
                                continue;
                            }
                            let alpha = multi_index(m, r, idx);
                            let factorial: f64 = alpha
                                .iter()
                                .map(|&a| (1..=a).map(f64::from).product::<f64>())
                                .product();
                            comp.add_term(alpha, tensor[c * per_comp + idx] / factorial);
                        }
                    }
                }
                comps
            })
            .collect()
    }

    /// Jet of `F(a) g` truncated at degree `out_order`, given the jet of `g` at
    /// `x` with degree at least `deg(a) + out_order`.
    fn apply_jet(
        &self,
        a: &TensorElement,
        g: &Polynomial,
        field_jets: &[Vec<Polynomial>],
        out_order: usize,
    ) -> Polynomial {
        let d = self.driving_dim();
        let deg = a.degree().unwrap_or(0);
        let top = (deg + out_order) as u32;
        let mut acc = g.truncate(out_order as u32).scaled(a.scalar());
        let mut prev = vec![g.truncate(top)];
        for k in 1..=deg {
            let keep = top - k as u32;
            let mut cur = Vec::with_capacity(d * prev.len());
            for jets in field_jets {
                for suffix in &prev {
                    let mut out = Polynomial::zero(g.nvars());
                    for (c, v) in jets.iter().enumerate() {
                        let dg = suffix.derivative(c);
                        if !dg.is_zero() {
                            out.add_assign_scaled(&v.mul_truncated(&dg, keep), 1.0);
                        }
                    }
                    cur.push(out);
                }
            }
            for (coeff, jet) in a.level_slice(k).iter().zip(&cur) {
                if *coeff != 0.0 {
                    acc.add_assign_scaled(&jet.truncate(out_order as u32), *coeff);
                }
            }
            prev = cur;
        }
        acc
    }

    fn observable_jets(&self, target: Observable<'_>, x: &[f64], order: usize) -> Vec<Polynomial> {
        let m = self.state_dim();
        match target {
            Observable::Identity => (0..m)
                .map(|c| Polynomial::variable(m, c).shift(x, order as u32))
                .collect(),
            Observable::Function(f) => vec![f.shift(x, order as u32)],
        }
    }

    /// `sum_w a^w (V_{w_1} ... V_{w_k} f)(x)`.
    pub fn apply_operator(
        &self,
        a: &TensorElement,
        target: Observable<'_>,
        x: &[f64],
    ) -> Result<Vec<f64>> {
        let deg = self.check_tensor(a)?;
        self.check_point(x)?;
        self.check_target(target)?;
        let field_jets = self.field_jets(x, deg.saturating_sub(1));
        Ok(self
            .observable_jets(target, x, deg)
            .iter()
            .map(|g| self.apply_jet(a, g, &field_jets, 0).constant_term())
            .collect())
    }

    /// `|F(a)(F(b) f)(x) - F(ab) f(x)|`.
    pub fn morphism_check(
        &self,
        a: &TensorElement,
        b: &TensorElement,
        f: &Polynomial,
        x: &[f64],
    ) -> Result<f64> {
        let da = self.check_tensor(a)?;
        let db = self.check_tensor(b)?;
        self.check_point(x)?;
        self.check_target(Observable::Function(f))?;
        if da + db > a.level() {
            return Err(invalid(format!(
                "combined degree {} exceeds truncation level {}",
                da + db,
                a.level()
            )));
        }
        let ab = a.mul(b)?;
        self.check_tensor(&ab)?;
        let field_jets = self.field_jets(x, (da + db).saturating_sub(1));
        let fj = f.shift(x, (da + db) as u32);
        let inner = self.apply_jet(b, &fj, &field_jets, da);
        let lhs = self.apply_jet(a, &inner, &field_jets, 0).constant_term();
        let rhs = self.apply_jet(&ab, &fj, &field_jets, 0).constant_term();
        Ok((lhs - rhs).abs())
    }

    /// The first-order field `x -> F(lambda) Id (x)` for a Lie element.
    pub fn lie_field(&self, lambda: &TensorElement) -> Result<LieField> {
        self.check_tensor(lambda)?;
        let def = lambda.lie_defect()?;
        if def > DEFAULT_TOL * lambda.norm().total.max(1.0) {
            return Err(Error::NotLie(def));
        }
        Ok(self.lie_field_unchecked(lambda))
    }

    pub(crate) fn lie_field_unchecked(&self, lambda: &TensorElement) -> LieField {
        match &self.inner.word_fields {
            Some(levels) => {
                let m = self.state_dim();
                let mut comps = vec![Polynomial::zero(m); m];
                for (k, words) in levels.iter().enumerate().take(lambda.level() + 1).skip(1) {
                    for (coeff, field) in lambda.level_slice(k).iter().zip(words) {
                        if *coeff == 0.0 {
                            continue;
                        }
                        for (acc, p) in comps.iter_mut().zip(field) {
                            acc.add_assign_scaled(p, *coeff);
                        }
                    }
                }
                LieField::Compiled(CompiledMap::new(&comps))
            }
            None => LieField::Jets {
                system: self.clone(),
                lambda: lambda.clone(),
            },
        }
    }

    /// High-order Euler step `F(g) Id (x) = x + sum_k F(pi_k g) Id (x)`.
    pub fn euler_map(&self, g: &TensorElement, x: &[f64]) -> Result<Vec<f64>> {
        self.apply_operator(g, Observable::Identity, x)
    }

    /// `F(w) Id` as a polynomial vector field, for polynomial systems.
    pub fn word_field(&self, w: &Word) -> Option<&[Polynomial]> {
        let levels = self.inner.word_fields.as_ref()?;
        let d = self.driving_dim();
        let mut idx = 0;
        for &l in w.letters() {
            if l == 0 || l > d {
                return None;
            }
            idx = idx * d + (l - 1);
        }
        levels.get(w.len()).map(|lvl| lvl[idx].as_slice())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.state_dim() {
            return Err(invalid(format!(
                "state point has dimension {}, expected {}",
                x.len(),
                self.state_dim()
            )));
        }
        Ok(())
    }

    fn check_target(&self, target: Observable<'_>) -> Result<()> {
        if let Observable::Function(f) = target {
            if f.nvars() != self.state_dim() {
                return Err(invalid("test function has the wrong number of variables"));
            }
        }
        Ok(())
    }
}

const FD_STEP: f64 = 1e-4;
const FD_TOL: f64 = 1e-6;

fn index_sequence(m: usize, order: usize, mut idx: usize) -> Vec<usize> {
    let mut seq = vec![0; order];
    for slot in seq.iter_mut().rev() {
        *slot = idx % m;
        idx /= m;
    }
    seq
}

fn check_dims(dims: impl Iterator<Item = usize>) -> Result<usize> {
    let dims: Vec<usize> = dims.collect();
    let m = *dims
        .first()
        .ok_or_else(|| invalid("need at least one vector field"))?;
    if dims.iter().any(|&k| k != m) {
        return Err(invalid(format!(
            "vector fields disagree on the state dimension: {dims:?}"
        )));
    }
    Ok(m)
}

/// Evaluator of the first-order field generated by a Lie element.
#[derive(Clone)]
pub enum LieField {
    Compiled(CompiledMap),
    Jets {
        system: VectorFieldSystem,
        lambda: TensorElement,
    },
}

impl LieField {
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            LieField::Compiled(map) => map.eval_into(x, out),
            LieField::Jets { system, lambda } => {
                let v = system
                    .apply_operator(lambda, Observable::Identity, x)
                    .expect("validated at construction");
                out.copy_from_slice(&v);
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.eval_into(x, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_a() -> Vec<Vec<f64>> {
        vec![vec![0.0, 1.0], vec![0.0, 0.0]]
    }

    fn mat_b() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0]]
    }

    fn linear_system() -> VectorFieldSystem {
        VectorFieldSystem::polynomial(
            vec![
                PolynomialField::linear(&mat_a()).unwrap(),
                PolynomialField::linear(&mat_b()).unwrap(),
            ],
            2,
        )
        .unwrap()
    }

    fn matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        m.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn word(l: &[usize]) -> Word {
        Word::new(l.to_vec())
    }

    #[test]
    fn unit_tensor_is_identity_operator() {
        let sys = linear_system();
        let f = Polynomial::variable(2, 0).mul(&Polynomial::variable(2, 1));
        let one = TensorElement::one(2, 2);
        let x = [0.3, -2.0];
        assert_eq!(
            sys.apply_operator(&one, Observable::Function(&f), &x)
                .unwrap(),
            vec![f.eval(&x)]
        );
        assert_eq!(
            sys.apply_operator(&one, Observable::Identity, &x).unwrap(),
            x.to_vec()
        );
    }

    #[test]
    fn single_letter_returns_the_field() {
        let sys = linear_system();
        let x = [0.3, -2.0];
        let e1 = TensorElement::letter(2, 2, 1);
        let got = sys.apply_operator(&e1, Observable::Identity, &x).unwrap();
        assert_eq!(got, matvec(&mat_a(), &x));
    }

    #[test]
    fn two_letter_word_composes_in_reverse() {
        let sys = linear_system();
        let x = [0.3, -2.0];
        let a = TensorElement::from_terms(2, 2, &[(word(&[1, 2]), 1.0)]).unwrap();
        let got = sys.apply_operator(&a, Observable::Identity, &x).unwrap();
        let expected = matvec(&mat_b(), &matvec(&mat_a(), &x));
        assert_eq!(got, expected);
        let symbolic = sys.word_field(&word(&[1, 2])).unwrap();
        for (c, p) in symbolic.iter().enumerate() {
            assert_eq!(p.eval(&x), expected[c]);
        }
    }

    #[test]
    fn word_longer_than_regularity_is_rejected() {
        let sys =
            VectorFieldSystem::polynomial(vec![PolynomialField::linear(&mat_a()).unwrap()], 1)
                .unwrap();
        let long = TensorElement::from_terms(1, 3, &[(word(&[1, 1, 1]), 1.0)]).unwrap();
        assert!(sys
            .apply_operator(&long, Observable::Identity, &[0.0, 1.0])
            .is_err());
    }

    #[test]
    fn morphism_on_letters() {
        let sys = linear_system();
        let f = Polynomial::variable(2, 0)
            .mul(&Polynomial::variable(2, 0))
            .add(&Polynomial::variable(2, 1).scaled(3.0));
        let one = TensorElement::one(2, 2);
        assert_eq!(
            sys.morphism_check(&one, &one, &f, &[1.0, 2.0]).unwrap(),
            0.0
        );
        let e1 = TensorElement::letter(2, 2, 1);
        let e2 = TensorElement::letter(2, 2, 2);
        assert!(sys.morphism_check(&e1, &e2, &f, &[1.0, 2.0]).unwrap() <= 1e-12);
        let ab = TensorElement::from_terms(2, 2, &[(word(&[1, 2]), 1.0)]).unwrap();
        assert!(sys.morphism_check(&ab, &e2, &f, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn lie_field_of_a_bracket_is_the_commutator() {
        let sys = linear_system();
        let area = TensorElement::from_terms(2, 2, &[(word(&[1, 2]), 1.0), (word(&[2, 1]), -1.0)])
            .unwrap();
        let field = sys.lie_field(&area).unwrap();
        let x = [0.7, -0.4];
        // BA - AB = diag(-1, 1)
        assert_eq!(field.eval(&x), vec![-0.7, -0.4]);
        let scaled = sys.lie_field(&area.scaled(2.5)).unwrap();
        assert_eq!(scaled.eval(&x), vec![-1.75, -1.0]);

        let not_lie = TensorElement::from_terms(2, 2, &[(word(&[1, 2]), 1.0)]).unwrap();
        assert!(matches!(sys.lie_field(&not_lie), Err(Error::NotLie(_))));
    }

    #[test]
    fn euler_map_examples() {
        let sys = linear_system();
        let x = [0.7, -0.4];
        let one = TensorElement::one(2, 2);
        assert_eq!(sys.euler_map(&one, &x).unwrap(), x.to_vec());
        let g = TensorElement::letter(2, 2, 1).exp().unwrap();
        // (I + A + A^2 / 2) x with A^2 = 0
        let ax = matvec(&mat_a(), &x);
        assert_eq!(
            sys.euler_map(&g, &x).unwrap(),
            vec![x[0] + ax[0], x[1] + ax[1]]
        );
    }

    #[test]
    fn polynomial_derivative_tensors_are_consistent() {
        let mut p = Polynomial::zero(2);
        p.add_term(vec![2, 1], 1.0);
        p.add_term(vec![0, 3], -0.5);
        let q = Polynomial::variable(2, 0).mul(&Polynomial::variable(2, 1));
        let sys = VectorFieldSystem::polynomial(vec![PolynomialField::new(vec![p, q]).unwrap()], 3)
            .unwrap();
        let err = sys.derivative_consistency(&[0.4, -1.1], 1e-4).unwrap();
        assert!(err < 1e-6, "{err:e}");
    }

    struct WrongDerivative;

    impl SmoothField for WrongDerivative {
        fn state_dim(&self) -> usize {
            1
        }
        fn derivative(&self, x: &[f64], order: usize) -> Vec<f64> {
            match order {
                0 => vec![x[0].sin()],
                // should be cos
                _ => vec![x[0].sin()],
            }
        }
    }

    #[test]
    fn callable_fields_are_validated() {
        let r = VectorFieldSystem::from_fields(
            vec![Arc::new(WrongDerivative) as Arc<dyn SmoothField>],
            1,
            &[vec![0.3]],
        );
        assert!(r.is_err());
    }

    #[test]
    fn mismatched_state_dims_rejected() {
        let f1 = PolynomialField::linear(&mat_a()).unwrap();
        let f2 = PolynomialField::linear(&[vec![1.0]]).unwrap();
        assert!(VectorFieldSystem::polynomial(vec![f1, f2], 2).is_err());
    }
}
