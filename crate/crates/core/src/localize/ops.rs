use crate::exactalg::rational::{inv_factorial, Rational};
use crate::exactalg::{a_table_recurrence, CoeffTable};
use crate::opalg::{build_model, DiffOp, ModelError, ModelFields};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocalizeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("coefficient table covers j <= {have}, need j = {need}")]
    TableTooSmall { need: usize, have: usize },
    #[error("{0}")]
    Range(String),
}

/// `N_j = sum_{j'} a^j_{j'} M^{j'}/j'!`
#[derive(Debug, Clone)]
pub struct LocalizerN {
    pub j: usize,
    pub k: u32,
    pub op: DiffOp,
}

/// `R^p_phi = sum_{j=0}^{p} phi^(j) N_j R^{p-j}`
#[derive(Debug, Clone)]
pub struct LocalizedPower {
    pub p: usize,
    pub k: u32,
    pub op: DiffOp,
}

/// Model fields plus the localizers `N_0..N_jmax`, built once and shared by
/// all verifications for a fixed `k`.
#[derive(Debug, Clone)]
pub struct Localizer {
    fields: ModelFields,
    table: CoeffTable,
    /// `M^i / i!`
    m_scaled: Vec<DiffOp>,
    n_ops: Vec<DiffOp>,
}

impl Localizer {
    pub fn new(k: i64, jmax: usize) -> Result<Self, LocalizeError> {
        Localizer::with_table(k, a_table_recurrence(jmax))
    }

    pub fn with_table(k: i64, table: CoeffTable) -> Result<Self, LocalizeError> {
        let fields = build_model(k)?;
        let jmax = table.jmax();
        let mut m_scaled = vec![DiffOp::one()];
        for i in 1..=jmax {
            let next = (&m_scaled[i - 1] * &fields.m).scale(&Rational::new(1.into(), i.into()));
            m_scaled.push(next);
        }
        let n_ops = (0..=jmax)
            .map(|j| {
                let row = table.row(j).expect("row within jmax");
                let mut op = DiffOp::zero();
                for (jp, a) in row.iter().enumerate() {
                    op += &m_scaled[jp].scale(a);
                }
                op
            })
            .collect();
        Ok(Localizer { fields, table, m_scaled, n_ops })
    }

    pub fn k(&self) -> u32 {
        self.fields.k
    }

    pub fn jmax(&self) -> usize {
        self.table.jmax()
    }

    pub fn fields(&self) -> &ModelFields {
        &self.fields
    }

    pub fn table(&self) -> &CoeffTable {
        &self.table
    }

    fn check(&self, j: usize) -> Result<(), LocalizeError> {
        if j > self.jmax() {
            return Err(LocalizeError::TableTooSmall { need: j, have: self.jmax() });
        }
        Ok(())
    }

    pub fn n(&self, j: usize) -> Result<&DiffOp, LocalizeError> {
        self.check(j)?;
        Ok(&self.n_ops[j])
    }

    /// `M^i / i!`
    pub fn m_scaled(&self, i: usize) -> Result<&DiffOp, LocalizeError> {
        self.check(i)?;
        Ok(&self.m_scaled[i])
    }

    pub fn build_n(&self, j: usize) -> Result<LocalizerN, LocalizeError> {
        Ok(LocalizerN { j, k: self.k(), op: self.n(j)?.clone() })
    }

    pub fn build_rp_phi(&self, p: usize) -> Result<LocalizedPower, LocalizeError> {
        Ok(LocalizedPower { p, k: self.k(), op: self.shifted_power(0, p)? })
    }

    /// `R^q_{phi^(m)} = sum_{j=0}^{q} phi^(m+j) N_j R^{q-j}`: the localized
    /// power with `phi` replaced by its `m`-th radial derivative.
    pub fn shifted_power(&self, m: u32, q: usize) -> Result<DiffOp, LocalizeError> {
        self.check(q)?;
        let mut out = DiffOp::zero();
        for j in 0..=q {
            let r = self.fields.r.pow((q - j) as u32);
            out += &(&(&DiffOp::phi(m + j as u32) * &self.n_ops[j]) * &r);
        }
        Ok(out)
    }
}

/// `N_j` for a single `(j, k)`, with a table sized to fit.
pub fn build_n(j: usize, k: i64) -> Result<LocalizerN, LocalizeError> {
    Localizer::new(k, j)?.build_n(j)
}

pub fn build_rp_phi(p: usize, k: i64) -> Result<LocalizedPower, LocalizeError> {
    Localizer::new(k, p)?.build_rp_phi(p)
}

/// `N_s` as a coefficient vector over plain powers `M^i`.
pub(crate) fn n_as_m_polynomial(table: &CoeffTable, s: usize) -> Vec<Rational> {
    table
        .row(s)
        .expect("row within jmax")
        .iter()
        .enumerate()
        .map(|(i, a)| a * inv_factorial(i as u32))
        .collect()
}
