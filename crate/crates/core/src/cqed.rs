//! Circuit-QED realization: resonator frequency plan, parametric tones per
//! link, rotating-frame couplings and the cross-talk audit.
//!
//! Frequencies are angular, in rad/ns (`2pi GHz`). Hopping strengths follow
//! [`LatticeSpec::hopping_j`] (`2pi MHz`). Time-dependent models work in units
//! of `J`: times in `1/J`, couplings and frequencies divided by `J`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gauge::{ComplexEntry, LinkId, LinkSet, UnitaryMatrix};
use crate::lattice::{build_real_space, oriented_link, LatticeModel, LatticeSpec, Orientation, Site};
use crate::scalar::{cis, cr, CMatrix, CVector, Scalar, C};

/// `2pi MHz` expressed in rad/ns.
const MHZ: f64 = TAU * 1e-3;

pub fn ghz(f: f64) -> f64 {
    TAU * f
}

/// Angular frequency (rad/ns) to `2pi MHz`.
pub fn to_mhz(omega: f64) -> f64 {
    omega / MHZ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFrequency {
    pub site: Site,
    pub mode: usize,
    pub omega: f64,
}

/// Resonator frequencies: `[A1, B1, C1] = [w0 - D, w0, w0 + D]`, second
/// modes doubled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPlan {
    pub omega0: f64,
    pub delta: f64,
    pub mode_freq: Vec<ModeFrequency>,
}

impl FrequencyPlan {
    pub fn freq(&self, site: Site, mode: usize) -> f64 {
        self.mode_freq
            .iter()
            .find(|m| m.site == site && m.mode == mode)
            .map(|m| m.omega)
            .unwrap_or(f64::NAN)
    }

    /// `|w_{a s} - w_{b s'}|` for `s, s'` in `1..=2`, ordered
    /// `(1,1), (2,2), (1,2), (2,1)`.
    pub fn branch_frequencies(&self, a: Site, b: Site) -> [f64; 4] {
        let d = |s, t| (self.freq(a, s) - self.freq(b, t)).abs();
        [d(1, 1), d(2, 2), d(1, 2), d(2, 1)]
    }

    fn shifted(&self, shifts: &[(Site, usize, f64)]) -> Self {
        let mut out = self.clone();
        for m in &mut out.mode_freq {
            if let Some((_, _, s)) = shifts.iter().find(|(site, mode, _)| *site == m.site && *mode == m.mode) {
                m.omega += s;
            }
        }
        out
    }
}

pub const DEFAULT_OMEGA0_GHZ: f64 = 5.5;
pub const DEFAULT_DELTA_GHZ: f64 = 1.5;

impl Default for FrequencyPlan {
    fn default() -> Self {
        make_plan(ghz(DEFAULT_OMEGA0_GHZ), ghz(DEFAULT_DELTA_GHZ), false).expect("defaults are valid")
    }
}

/// Frequency plan for `omega0`, `delta` (rad/ns). Outside
/// `w0/2pi in [5, 6] GHz`, `D/2pi in [1, 2] GHz` requires `allow_out_of_range`.
pub fn make_plan(omega0: f64, delta: f64, allow_out_of_range: bool) -> Result<FrequencyPlan> {
    if !(omega0.is_finite() && delta.is_finite() && delta > 0.0 && omega0 > delta) {
        return Err(invalid("omega0", "need finite 0 < delta < omega0"));
    }
    let (f0, fd) = (omega0 / TAU, delta / TAU);
    if !allow_out_of_range {
        if !(5.0..=6.0).contains(&f0) {
            return Err(invalid("omega0", format!("{f0} GHz outside [5, 6] GHz")));
        }
        if !(1.0..=2.0).contains(&fd) {
            return Err(invalid("delta", format!("{fd} GHz outside [1, 2] GHz")));
        }
    }
    let first = [(Site::A, omega0 - delta), (Site::B, omega0), (Site::C, omega0 + delta)];
    let mut mode_freq = Vec::with_capacity(6);
    for mode in [1usize, 2] {
        for (site, w) in first {
            mode_freq.push(ModeFrequency { site, mode, omega: w * mode as f64 });
        }
    }
    let plan = FrequencyPlan { omega0, delta, mode_freq };
    for (name, a, b) in [("A-B", Site::A, Site::B), ("A-C", Site::A, Site::C)] {
        let f = plan.branch_frequencies(a, b);
        for i in 0..4 {
            if f[i] <= 1e-9 * omega0 {
                return Err(Error::DegenerateTransitions { pair: name, freq: f[i] });
            }
            for j in 0..i {
                if (f[i] - f[j]).abs() <= 1e-9 * omega0 {
                    return Err(Error::DegenerateTransitions { pair: name, freq: f[i] });
                }
            }
        }
    }
    Ok(plan)
}

/// One modulation tone `2J cos(nu t - phase)` on a coupler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    /// `nu`, rad/ns.
    pub frequency: f64,
    /// `2J`, same units as the hopping strength.
    pub amplitude: f64,
    /// Radians in `(-pi, pi]`.
    pub phase: f64,
    pub link: LinkId,
    /// 1-based mode on the link's row site.
    pub row_mode: usize,
    /// 1-based mode on the link's column site.
    pub col_mode: usize,
    pub entry: ComplexEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkTones {
    pub link: LinkId,
    /// Site whose modes index the link matrix rows.
    pub row_site: Site,
    pub col_site: Site,
    pub tones: Vec<Tone>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneTable {
    pub orientation: Orientation,
    pub n_components: usize,
    pub links: Vec<LinkTones>,
}

fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(TAU);
    if p > PI {
        p -= TAU;
    }
    if p <= -PI {
        p += TAU;
    }
    p
}

/// One tone per nonzero link entry.
///
/// The entry `u` of the block `H[row, col] = -J U` becomes the rotating-frame
/// coefficient `J e^{i phase}` when the row mode is the higher one and
/// `J e^{-i phase}` otherwise, so `phase = +-arg(-u)`.
pub fn synthesize_tones<T: Scalar>(
    links: &LinkSet<T>,
    plan: &FrequencyPlan,
    hopping_j: f64,
    orientation: Orientation,
) -> Result<ToneTable> {
    let n = links.n_components();
    if n > 2 {
        return Err(Error::UnsupportedLink(format!(
            "{n} components; the resonator plan has two modes per site"
        )));
    }
    let mut out = Vec::with_capacity(4);
    for link in LinkId::ALL {
        let (row_site, col_site, _) = oriented_link(link, orientation);
        let u = links.link(link).matrix();
        let mut tones = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let z = C::new(u[(a, b)].re.to_f64_lossy(), u[(a, b)].im.to_f64_lossy());
                let modulus = z.norm();
                if modulus <= 1e-12 {
                    continue;
                }
                if (modulus - 1.0).abs() > 1e-12 {
                    return Err(Error::UnsupportedLink(format!(
                        "{} entry ({}, {}) has modulus {modulus}, need 0 or 1",
                        link.name(),
                        a + 1,
                        b + 1
                    )));
                }
                let w_row = plan.freq(row_site, a + 1);
                let w_col = plan.freq(col_site, b + 1);
                let target = (-z).arg();
                let phase = wrap_phase(if w_row > w_col { target } else { -target });
                tones.push(Tone {
                    frequency: (w_row - w_col).abs(),
                    amplitude: 2.0 * hopping_j,
                    phase,
                    link,
                    row_mode: a + 1,
                    col_mode: b + 1,
                    entry: ComplexEntry { re: z.re, im: z.im },
                });
            }
        }
        if tones.len() > 2 {
            return Err(Error::UnsupportedLink(format!(
                "{} has {} nonzero entries, at most 2 tones per coupler",
                link.name(),
                tones.len()
            )));
        }
        out.push(LinkTones { link, row_site, col_site, tones });
    }
    Ok(ToneTable { orientation, n_components: n, links: out })
}

/// Link variables implied by the tone phases alone (inverse of
/// [`synthesize_tones`]).
pub fn links_from_tones<T: Scalar>(table: &ToneTable, plan: &FrequencyPlan) -> Result<LinkSet<T>> {
    let n = table.n_components;
    let mut mats: Vec<UnitaryMatrix<T>> = Vec::with_capacity(4);
    for lt in &table.links {
        let mut m = CMatrix::<T>::zeros(n, n);
        for tone in &lt.tones {
            let w_row = plan.freq(lt.row_site, tone.row_mode);
            let w_col = plan.freq(lt.col_site, tone.col_mode);
            let phi = if w_row > w_col { tone.phase } else { -tone.phase };
            m[(tone.row_mode - 1, tone.col_mode - 1)] = -cis(T::of(phi));
        }
        mats.push(UnitaryMatrix::new(m)?);
    }
    let mut it = mats.into_iter();
    let mut next = || it.next().ok_or(Error::BasisMismatch("tone table needs four links".into()));
    LinkSet::new(next()?, next()?, next()?, next()?)
}

/// The tier-0 lattice rebuilt from synthesized tones.
pub fn effective_hamiltonian<T: Scalar>(
    links: &LinkSet<T>,
    plan: &FrequencyPlan,
    spec: LatticeSpec<T>,
) -> Result<LatticeModel<T>> {
    let table = synthesize_tones(links, plan, spec.hopping_j.to_f64_lossy(), spec.orientation)?;
    build_real_space(spec, &links_from_tones(&table, plan)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Tier {
    /// Static effective Hamiltonian.
    Effective = 0,
    /// Every beam-splitter term with its oscillating phase.
    BeamSplitter = 1,
    /// Tier 1 plus counter-rotating pair terms.
    Full = 2,
}

impl From<Tier> for u8 {
    fn from(t: Tier) -> u8 {
        t as u8
    }
}

impl TryFrom<u8> for Tier {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Tier::Effective),
            1 => Ok(Tier::BeamSplitter),
            2 => Ok(Tier::Full),
            _ => Err(invalid("tier", format!("need 0, 1 or 2, got {v}"))),
        }
    }
}

/// Mode pairs sharing one rotating-frame phase.
#[derive(Debug, Clone)]
struct Branch<T> {
    /// `(w_r - w_c) / J`.
    difference: T,
    /// `(w_r + w_c) / J`.
    sum: T,
    pairs: Vec<(usize, usize)>,
}

/// One coupler type: its tones and every branch it touches.
#[derive(Debug, Clone)]
struct Channel<T> {
    /// `(nu / J, phase)`; amplitude is `2` in units of `J`.
    tones: Vec<(T, T)>,
    branches: Vec<Branch<T>>,
}

impl<T: Scalar> Channel<T> {
    fn g(&self, t: T) -> T {
        self.tones
            .iter()
            .fold(T::zero(), |acc, (nu, phi)| acc + T::of(2.0) * (*nu * t - *phi).cos())
    }
}

/// Rotating-frame coupling `B(t)` (units of `J`) at a given tier.
#[derive(Debug, Clone)]
pub struct TimeDependentModel<T: Scalar> {
    pub tier: Tier,
    pub plan: Option<FrequencyPlan>,
    pub tones: Option<ToneTable>,
    /// Unit of the coupling matrix, `2pi MHz`.
    pub hopping_j: T,
    /// Static per-mode detuning added to `B(t)` (units of `J`), e.g. a
    /// frame rotating at Stark-dressed frequencies.
    pub diagonal: Option<CVector<T>>,
    static_b: CMatrix<T>,
    channels: Vec<Channel<T>>,
}

pub fn build_time_dependent<T: Scalar>(
    links: &LinkSet<T>,
    plan: &FrequencyPlan,
    spec: LatticeSpec<T>,
    tier: Tier,
) -> Result<TimeDependentModel<T>> {
    let model = build_real_space(spec, links)?;
    let static_b = model.hamiltonian_in_j();
    if tier == Tier::Effective {
        return Ok(TimeDependentModel {
            tier,
            plan: Some(plan.clone()),
            tones: None,
            hopping_j: spec.hopping_j,
            diagonal: None,
            static_b,
            channels: Vec::new(),
        });
    }
    let j = spec.hopping_j.to_f64_lossy();
    let table = synthesize_tones(links, plan, j, spec.orientation)?;
    let scale = 1.0 / (j * MHZ);
    let n = spec.n_components;
    let mut channels = Vec::with_capacity(4);
    for lt in &table.links {
        let tones = lt.tones.iter().map(|t| (T::of(t.frequency * scale), T::of(t.phase))).collect();
        let bonds: Vec<_> = model.bonds().iter().filter(|b| b.link == lt.link).collect();
        let mut branches = Vec::with_capacity(n * n);
        for s in 1..=n {
            for sp in 1..=n {
                let (w_r, w_c) = (plan.freq(lt.row_site, s), plan.freq(lt.col_site, sp));
                let pairs = bonds
                    .iter()
                    .map(|b| {
                        let r = model.site_offset(b.row)? + s - 1;
                        let col = model.site_offset(b.col)? + sp - 1;
                        Ok((r, col))
                    })
                    .collect::<Result<Vec<_>>>()?;
                branches.push(Branch {
                    difference: T::of((w_r - w_c) * scale),
                    sum: T::of((w_r + w_c) * scale),
                    pairs,
                });
            }
        }
        channels.push(Channel { tones, branches });
    }
    Ok(TimeDependentModel { tier, plan: Some(plan.clone()), tones: Some(table), hopping_j: spec.hopping_j, diagonal: None, static_b, channels })
}

impl<T: Scalar> TimeDependentModel<T> {
    /// Tier-0 model straight from a lattice, no frequency plan attached.
    pub fn from_static(model: &LatticeModel<T>) -> Self {
        Self {
            tier: Tier::Effective,
            plan: None,
            tones: None,
            hopping_j: model.spec.hopping_j,
            diagonal: None,
            static_b: model.hamiltonian_in_j(),
            channels: Vec::new(),
        }
    }

    /// Two resonators at `omega1`, `omega2` (units of `J`) coupled by
    /// `2J cos((omega1 - omega2) t - theta)`; tier 0 is
    /// `J a1^dag a2 e^{i theta} + h.c.`, with `J = 1`.
    pub fn two_mode(omega1: T, omega2: T, theta: T, tier: Tier) -> Self {
        let mut static_b = CMatrix::zeros(2, 2);
        static_b[(0, 1)] = cis(theta);
        static_b[(1, 0)] = cis(-theta);
        let channels = if tier == Tier::Effective {
            Vec::new()
        } else {
            let d = omega1 - omega2;
            let (nu, phi) = if d >= T::zero() { (d, theta) } else { (-d, -theta) };
            vec![Channel {
                tones: vec![(nu, phi)],
                branches: vec![Branch { difference: d, sum: omega1 + omega2, pairs: vec![(0, 1)] }],
            }]
        };
        Self { tier, plan: None, tones: None, hopping_j: T::one(), diagonal: None, static_b, channels }
    }

    pub fn dim(&self) -> usize {
        self.static_b.nrows()
    }

    /// The tier-0 coupling matrix.
    pub fn effective(&self) -> &CMatrix<T> {
        &self.static_b
    }

    /// Beam-splitter part of `B(t)`.
    pub fn coupling_matrix(&self, t: T) -> CMatrix<T> {
        let mut b = self.bare_coupling_matrix(t);
        if let Some(d) = &self.diagonal {
            b.set_diagonal(&(b.diagonal() + d));
        }
        b
    }

    fn bare_coupling_matrix(&self, t: T) -> CMatrix<T> {
        if self.tier == Tier::Effective {
            return self.static_b.clone();
        }
        let mut b = CMatrix::zeros(self.dim(), self.dim());
        for ch in &self.channels {
            let g = ch.g(t);
            for br in &ch.branches {
                let coef = cis(br.difference * t) * g;
                for &(r, col) in &br.pairs {
                    b[(r, col)] += coef;
                    b[(col, r)] += coef.conj();
                }
            }
        }
        b
    }

    /// Matrix multiplying `conj(alpha)` (tier 2 only; zero otherwise) in a
    /// frame rotating at the pump detuning `omega_p`.
    pub fn pair_matrix(&self, t: T, omega_p: T) -> CMatrix<T> {
        let mut q = CMatrix::zeros(self.dim(), self.dim());
        if self.tier != Tier::Full {
            return q;
        }
        for ch in &self.channels {
            let g = ch.g(t);
            for br in &ch.branches {
                let coef = cis((br.sum + T::of(2.0) * omega_p) * t) * g;
                for &(r, col) in &br.pairs {
                    q[(r, col)] += coef;
                    q[(col, r)] += coef;
                }
            }
        }
        q
    }

    /// `B(t) alpha + Q(t) conj(alpha)`.
    pub fn apply(&self, t: T, alpha: &CVector<T>, omega_p: T) -> CVector<T> {
        let mut out = self.apply_couplings(t, alpha, omega_p);
        if let Some(d) = &self.diagonal {
            out += d.component_mul(alpha);
        }
        out
    }

    fn apply_couplings(&self, t: T, alpha: &CVector<T>, omega_p: T) -> CVector<T> {
        if self.tier == Tier::Effective {
            return &self.static_b * alpha;
        }
        let mut out = CVector::zeros(alpha.len());
        let pairs = self.tier == Tier::Full;
        for ch in &self.channels {
            let g = ch.g(t);
            for br in &ch.branches {
                let coef = cis(br.difference * t) * g;
                let pcoef = if pairs {
                    cis((br.sum + T::of(2.0) * omega_p) * t) * g
                } else {
                    cr(T::zero())
                };
                for &(r, col) in &br.pairs {
                    out[r] += coef * alpha[col];
                    out[col] += coef.conj() * alpha[r];
                    if pairs {
                        out[r] += pcoef * alpha[col].conj();
                        out[col] += pcoef * alpha[r].conj();
                    }
                }
            }
        }
        out
    }

    /// Fourier decomposition of the beam-splitter part,
    /// `B(t) = sum_w V_w e^{i w t}`, as `(w, V_w)` with distinct `w` (units
    /// of `J`), ascending.
    pub fn fourier_components(&self) -> Vec<(T, CMatrix<T>)> {
        let n = self.dim();
        if self.tier == Tier::Effective {
            let mut b = self.static_b.clone();
            if let Some(d) = &self.diagonal {
                b.set_diagonal(&(b.diagonal() + d));
            }
            return vec![(T::zero(), b)];
        }
        let scale = self.channels.iter().flat_map(|ch| ch.tones.iter().map(|t| t.0.abs())).fold(T::one(), |a, b| a.max(b));
        let tol = T::of(1e-9) * scale;
        let mut out: Vec<(T, CMatrix<T>)> = Vec::new();
        let mut add = |w: T, r: usize, col: usize, z: C<T>| {
            let slot = match out.iter().position(|(x, _)| (*x - w).abs() <= tol) {
                Some(k) => k,
                None => {
                    out.push((w, CMatrix::zeros(n, n)));
                    out.len() - 1
                }
            };
            out[slot].1[(r, col)] += z;
        };
        for ch in &self.channels {
            for &(nu, phi) in &ch.tones {
                for br in &ch.branches {
                    for &(r, col) in &br.pairs {
                        // 2 cos(nu t - phi) = e^{i(nu t - phi)} + e^{-i(nu t - phi)}
                        for (w, z) in [(br.difference + nu, cis(-phi)), (br.difference - nu, cis(phi))] {
                            let w = if w.abs() <= tol { T::zero() } else { w };
                            add(w, r, col, z);
                            add(-w, col, r, z.conj());
                        }
                    }
                }
            }
        }
        if let Some(d) = &self.diagonal {
            match out.iter_mut().find(|(w, _)| *w == T::zero()) {
                Some((_, v)) => v.set_diagonal(&(v.diagonal() + d)),
                None => out.push((T::zero(), CMatrix::from_diagonal(d))),
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        out
    }

    /// Static part plus the second-order high-frequency correction
    /// `1/2 sum_{w != 0} [V_w, V_{-w}] / w` (units of `J`).
    pub fn second_order_effective(&self) -> CMatrix<T> {
        let comps = self.fourier_components();
        let n = self.dim();
        let mut h = CMatrix::zeros(n, n);
        for (w, v) in &comps {
            if *w == T::zero() {
                h += v;
            } else {
                let vm = v.adjoint();
                h += (v * &vm - &vm * v) * cr(T::of(0.5) / *w);
            }
        }
        h
    }

    /// Same couplings seen from a frame rotating at the second-order
    /// (a.c. Stark) dressed mode frequencies: the diagonal of
    /// [`second_order_effective`](Self::second_order_effective) beyond the
    /// static part is subtracted. Equivalent to retuning tones and pump to
    /// the dressed modes.
    pub fn stark_compensated(&self) -> Self {
        let h2 = self.second_order_effective();
        let shift = h2.diagonal() - self.static_b.diagonal();
        let mut out = self.clone();
        out.diagonal = Some(-shift.map(|z| cr(z.re)) + self.diagonal.clone().unwrap_or_else(|| CVector::zeros(self.dim())));
        out
    }

    /// Fastest phase rotation in `B(t)` (units of `J`), for step-size hints.
    pub fn max_frequency(&self) -> T {
        let mut w = T::zero();
        for ch in &self.channels {
            let nu = ch.tones.iter().fold(T::zero(), |a, (n, _)| a.max(*n));
            for br in &ch.branches {
                let f = if self.tier == Tier::Full { br.sum.abs() } else { br.difference.abs() };
                w = w.max(f + nu);
            }
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    BeamSplitter,
    Pair,
}

/// One rotating-frame term generated by a tone on a branch.
#[derive(Debug, Clone, Serialize)]
pub struct AuditTerm {
    pub link: LinkId,
    pub tone_row_mode: usize,
    pub tone_col_mode: usize,
    pub row_mode: usize,
    pub col_mode: usize,
    pub kind: TermKind,
    /// Signed oscillation frequency, rad/ns.
    pub detuning: f64,
    pub intended: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StarkShift {
    pub site: Site,
    pub mode: usize,
    /// Signed second-order sum `sum J^2 / detuning`, `2pi MHz`.
    pub signed_mhz: f64,
    /// `sum J^2 / |detuning|`, `2pi MHz`.
    pub magnitude_mhz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub plan: FrequencyPlan,
    pub hopping_j: f64,
    pub tones: ToneTable,
    pub terms: Vec<AuditTerm>,
    /// rad/ns.
    pub min_beam_splitter_detuning: f64,
    /// rad/ns.
    pub min_pair_detuning: f64,
    pub stark: Vec<StarkShift>,
    /// Plan with each bulk mode moved by its signed shift.
    pub compensated_plan: FrequencyPlan,
}

impl AuditReport {
    pub fn max_stark_magnitude_mhz(&self) -> f64 {
        self.stark.iter().fold(0.0, |a, s| a.max(s.magnitude_mhz))
    }
}

/// Enumerate every term each tone produces on its coupler and the resulting
/// second-order shift of every bulk mode.
pub fn crosstalk_audit<T: Scalar>(
    links: &LinkSet<T>,
    plan: &FrequencyPlan,
    hopping_j: f64,
    orientation: Orientation,
) -> Result<AuditReport> {
    let tones = synthesize_tones(links, plan, hopping_j, orientation)?;
    let n = tones.n_components;
    let j = hopping_j * MHZ;
    let tol = 1e-9 * plan.omega0;
    let mut terms = Vec::new();
    // (site, mode) -> (signed, magnitude), rad/ns
    let mut shift = [[(0.0f64, 0.0f64); 2]; 3];

    for lt in &tones.links {
        for tone in &lt.tones {
            for s in 1..=n {
                for sp in 1..=n {
                    let (w_r, w_c) = (plan.freq(lt.row_site, s), plan.freq(lt.col_site, sp));
                    let intended_branch = s == tone.row_mode && sp == tone.col_mode;
                    for sign in [1.0, -1.0] {
                        let bs = w_r - w_c - sign * tone.frequency;
                        let intended = intended_branch && bs.abs() <= tol;
                        terms.push(AuditTerm {
                            link: lt.link,
                            tone_row_mode: tone.row_mode,
                            tone_col_mode: tone.col_mode,
                            row_mode: s,
                            col_mode: sp,
                            kind: TermKind::BeamSplitter,
                            detuning: bs,
                            intended,
                        });
                        if !intended {
                            // row mode shifts by J^2/d, column mode by -J^2/d
                            let e = j * j / bs;
                            add_shift(&mut shift, lt.row_site, s, e);
                            add_shift(&mut shift, lt.col_site, sp, -e);
                        }
                        let pair = w_r + w_c - sign * tone.frequency;
                        terms.push(AuditTerm {
                            link: lt.link,
                            tone_row_mode: tone.row_mode,
                            tone_col_mode: tone.col_mode,
                            row_mode: s,
                            col_mode: sp,
                            kind: TermKind::Pair,
                            detuning: pair,
                            intended: false,
                        });
                        let e = j * j / pair;
                        add_shift(&mut shift, lt.row_site, s, -e);
                        add_shift(&mut shift, lt.col_site, sp, -e);
                    }
                }
            }
        }
    }

    let min_of = |kind: TermKind| {
        terms
            .iter()
            .filter(|t| t.kind == kind && !t.intended)
            .fold(f64::INFINITY, |a, t| a.min(t.detuning.abs()))
    };
    let mut stark = Vec::new();
    let mut shifts = Vec::new();
    for site in Site::ALL {
        for mode in 1..=n {
            let (signed, mag) = shift[site.ordinal()][mode - 1];
            stark.push(StarkShift { site, mode, signed_mhz: to_mhz(signed), magnitude_mhz: to_mhz(mag) });
            shifts.push((site, mode, signed));
        }
    }
    Ok(AuditReport {
        plan: plan.clone(),
        hopping_j,
        min_beam_splitter_detuning: min_of(TermKind::BeamSplitter),
        min_pair_detuning: min_of(TermKind::Pair),
        compensated_plan: plan.shifted(&shifts),
        tones,
        terms,
        stark,
    })
}

fn add_shift(acc: &mut [[(f64, f64); 2]; 3], site: Site, mode: usize, e: f64) {
    let cell = &mut acc[site.ordinal()][mode - 1];
    cell.0 += e;
    cell.1 += e.abs();
}

/// Effective hopping of the two-mode toy, `J e^{i theta}`.
pub fn toy_effective_hopping<T: Scalar>(theta: T) -> C<T> {
    cis(theta)
}
