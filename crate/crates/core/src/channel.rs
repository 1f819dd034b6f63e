//! Per-block channel generation: direct UE-BS links (Rician with correlated
//! scattering), the UE-RIS and RIS-BS finite-path links, the RIS-cascaded
//! effective channel, and the urban-macro pathloss that feeds the large-scale
//! link budget.

use crate::{cpolar, cscale, CMatrix, CVector, Scalar};
use nalgebra::Vector3;
use num_complex::Complex;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("pathloss model domain: {name} = {value} outside [{low}, {high}]")]
    PathlossDomain {
        name: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

/// Scene geometry and array descriptions. Positions are meters in a global
/// frame with z up; BS arrays are ULAs along the x axis, the RIS is a UPA
/// whose local frame is derived from `ris_normal`.
#[derive(Debug, Clone)]
pub struct Geometry<T: Scalar> {
    pub bs_positions: Vec<Vector3<T>>,
    pub ue_positions: Vec<Vector3<T>>,
    pub ris_position: Vector3<T>,
    /// Unit normal of the RIS panel.
    pub ris_normal: Vector3<T>,
    /// Receive antennas per BS.
    pub bs_antennas: usize,
    /// RIS element grid (K_x, K_y).
    pub ris_shape: (usize, usize),
    /// BS inter-element spacing, meters.
    pub bs_spacing: T,
    /// RIS inter-element spacings, meters.
    pub ris_spacings: (T, T),
    pub carrier_wavelength: T,
}

impl<T: Scalar> Geometry<T> {
    pub fn n_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn n_bss(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn ris_elements(&self) -> usize {
        self.ris_shape.0 * self.ris_shape.1
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.bs_positions.is_empty() || self.ue_positions.is_empty() {
            return Err(ChannelError::InvalidGeometry(
                "need at least one BS and one UE".into(),
            ));
        }
        if self.bs_antennas < 1 {
            return Err(ChannelError::InvalidGeometry(
                "bs_antennas must be >= 1".into(),
            ));
        }
        if self.ris_shape.0 < 1 || self.ris_shape.1 < 1 {
            return Err(ChannelError::InvalidGeometry(
                "ris_shape must be >= 1".into(),
            ));
        }
        let pos_spacings = self.bs_spacing > T::zero()
            && self.ris_spacings.0 > T::zero()
            && self.ris_spacings.1 > T::zero()
            && self.carrier_wavelength > T::zero();
        if !pos_spacings {
            return Err(ChannelError::InvalidGeometry(
                "spacings and wavelength must be positive".into(),
            ));
        }
        let finite = self
            .bs_positions
            .iter()
            .chain(self.ue_positions.iter())
            .chain(std::iter::once(&self.ris_position))
            .all(|p| p.iter().all(|c| c.is_finite()));
        if !finite {
            return Err(ChannelError::InvalidGeometry(
                "positions must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Panel normal pointing at the bisector of the first BS and the first
    /// UE as seen from the RIS, so both ends of the strongest cascade sit in
    /// front of the panel.
    pub fn auto_ris_normal(bs: &[Vector3<T>], ue: &[Vector3<T>], ris: &Vector3<T>) -> Vector3<T> {
        let d1 = (bs[0] - ris).normalize();
        let d2 = (ue[0] - ris).normalize();
        let sum = d1 + d2;
        if sum.norm() > T::lit(1e-9) {
            sum.normalize()
        } else {
            Vector3::new(T::one(), T::zero(), T::zero())
        }
    }

    /// Local RIS frame (x axis, y axis, normal).
    pub fn ris_frame(&self) -> (Vector3<T>, Vector3<T>, Vector3<T>) {
        let n = self.ris_normal.normalize();
        let up = Vector3::new(T::zero(), T::zero(), T::one());
        let x = up.cross(&n);
        let x = if x.norm() > T::lit(1e-9) {
            x.normalize()
        } else {
            Vector3::new(T::one(), T::zero(), T::zero())
        };
        let y = n.cross(&x);
        (x, y, n)
    }

    /// Angle of arrival at a BS ULA (measured from broadside) for a signal
    /// coming from `source`.
    pub fn bs_aoa(&self, m: usize, source: &Vector3<T>) -> T {
        let dir = (source - self.bs_positions[m]).normalize();
        // array axis is x: sin(theta) is the direction component along it
        dir.x.min(T::one()).max(-T::one()).asin()
    }

    /// (azimuth, zenith) of `target` in the RIS local frame.
    pub fn ris_angles(&self, target: &Vector3<T>) -> (T, T) {
        let (x, y, n) = self.ris_frame();
        let dir = (target - self.ris_position).normalize();
        let ux = dir.dot(&x);
        let uy = dir.dot(&y);
        let un = dir.dot(&n).min(T::one()).max(-T::one());
        (uy.atan2(ux), un.acos())
    }
}

/// Large-scale statistics of every link for one block.
#[derive(Debug, Clone)]
pub struct LinkStatistics<T: Scalar> {
    /// Direct-link power gains, indexed `n * M + m`.
    pub beta_direct: Vec<T>,
    /// UE-RIS power gains per UE.
    pub beta_ue_ris: Vec<T>,
    /// RIS-BS power gains per BS.
    pub beta_ris_bs: Vec<T>,
    /// Rician K-factor of each direct link, same layout as `beta_direct`.
    pub rician_kappa: Vec<T>,
    /// K-factor of the RIS-side links.
    pub kappa_ris: T,
    /// Square root of the receive correlation matrix shared by all links.
    pub bs_correlation_sqrt: CMatrix<T>,
    pub paths_ue_ris: usize,
    pub paths_ris_bs: usize,
    /// Half-width of the uniform angle perturbation on secondary paths,
    /// radians.
    pub angle_spread: T,
}

/// Receive correlation `R_ab = r^|a-b|`; returns its PSD square root.
pub fn exponential_correlation_sqrt<T: Scalar>(dim: usize, r: T) -> CMatrix<T> {
    if r == T::zero() {
        return CMatrix::identity(dim, dim);
    }
    let m = CMatrix::<T>::from_fn(dim, dim, |a, b| {
        let k = (a as i32 - b as i32).abs();
        Complex::new(r.powi(k), T::zero())
    });
    let (vals, vecs) = T::hermitian_eigen(&m);
    let mut half = vecs.clone();
    for k in 0..dim {
        half.column_mut(k).scale_mut(vals[k].max(T::zero()).sqrt());
    }
    &half * vecs.adjoint()
}

/// Path gains and angles for one link realization.
#[derive(Debug, Clone, Default)]
pub struct PathComponents<T: Scalar> {
    /// Line-of-sight phase of a direct link.
    pub los_phase: T,
    /// Angle of arrival at the BS for the direct line of sight.
    pub bs_aoa: T,
    /// Per-path complex gains of a RIS-side link.
    pub gains: Vec<Complex<T>>,
    /// Per-path azimuth at the RIS (arrival for UE-RIS, departure for
    /// RIS-BS).
    pub ris_azimuth: Vec<T>,
    /// Per-path zenith at the RIS.
    pub ris_zenith: Vec<T>,
    /// Per-path angle of arrival at the BS (RIS-BS link only).
    pub bs_path_aoa: Vec<T>,
}

fn wrap_angle<T: Scalar>(a: T) -> T {
    let tau = T::two_pi();
    let mut x = a;
    while x > T::pi() {
        x -= tau;
    }
    while x <= -T::pi() {
        x += tau;
    }
    x
}

/// Draws the line-of-sight phase of a direct link.
pub fn draw_direct_components<T: Scalar, R: Rng + ?Sized>(
    bs_aoa: T,
    rng: &mut R,
) -> PathComponents<T> {
    let phase = T::sample_uniform(rng, -T::pi(), T::pi());
    PathComponents {
        los_phase: phase,
        bs_aoa,
        ..PathComponents::default()
    }
}

/// Draws per-path gains and angles for a RIS-side link: the first path is the
/// geometric one carrying the K-factor share of the power with a fresh phase
/// each block, the rest are scattered paths around it. Total mean path power
/// is one.
pub fn draw_ris_components<T: Scalar, R: Rng + ?Sized>(
    dominant_azimuth: T,
    dominant_zenith: T,
    dominant_bs_aoa: T,
    paths: usize,
    kappa: T,
    angle_spread: T,
    rng: &mut R,
) -> PathComponents<T> {
    assert!(paths >= 1, "need at least one path");
    let mut gains = Vec::with_capacity(paths);
    let mut az = Vec::with_capacity(paths);
    let mut zen = Vec::with_capacity(paths);
    let mut bs = Vec::with_capacity(paths);

    let los_power = kappa / (kappa + T::one());
    let nlos_power = T::one() / (kappa + T::one());
    let half = T::lit(0.5).sqrt();

    for s in 0..paths {
        if s == 0 {
            let phase = T::sample_uniform(rng, -T::pi(), T::pi());
            let mut g = cpolar(los_power.sqrt(), phase);
            if paths == 1 {
                // single resolvable path carries the scattered power too
                g += cscale(
                    Complex::new(
                        T::standard_normal(rng) * half,
                        T::standard_normal(rng) * half,
                    ),
                    nlos_power.sqrt(),
                );
            }
            gains.push(g);
            az.push(dominant_azimuth);
            zen.push(dominant_zenith);
            bs.push(dominant_bs_aoa);
        } else {
            let var = nlos_power / T::lit((paths - 1) as f64);
            gains.push(cscale(
                Complex::new(
                    T::standard_normal(rng) * half,
                    T::standard_normal(rng) * half,
                ),
                var.sqrt(),
            ));
            az.push(wrap_angle(
                dominant_azimuth + T::sample_uniform(rng, -angle_spread, angle_spread),
            ));
            zen.push(wrap_angle(
                dominant_zenith + T::sample_uniform(rng, -angle_spread, angle_spread),
            ));
            bs.push(wrap_angle(
                dominant_bs_aoa + T::sample_uniform(rng, -angle_spread, angle_spread),
            ));
        }
    }
    PathComponents {
        los_phase: T::zero(),
        bs_aoa: dominant_bs_aoa,
        gains,
        ris_azimuth: az,
        ris_zenith: zen,
        bs_path_aoa: bs,
    }
}

/// Unit-norm ULA steering vector: entry `k` is `exp(-j 2π d/λ k sinθ) / √L`.
pub fn ula_response<T: Scalar>(theta: T, l: usize, spacing: T, wavelength: T) -> CVector<T> {
    let norm = T::one() / T::lit(l as f64).sqrt();
    let step = -T::two_pi() * spacing / wavelength * theta.sin();
    CVector::from_fn(l, |k, _| cpolar(norm, step * T::lit(k as f64)))
}

/// Unit-norm UPA steering vector `a_x ⊗ a_y` with direction cosines
/// `u_x = sinθ cosφ`, `u_y = sinθ sinφ`.
pub fn upa_response<T: Scalar>(
    phi: T,
    theta: T,
    shape: (usize, usize),
    spacings: (T, T),
    wavelength: T,
) -> CVector<T> {
    let (kx, ky) = shape;
    let ux = theta.sin() * phi.cos();
    let uy = theta.sin() * phi.sin();
    let step_x = -T::two_pi() * spacings.0 / wavelength * ux;
    let step_y = -T::two_pi() * spacings.1 / wavelength * uy;
    let nx = T::one() / T::lit(kx as f64).sqrt();
    let ny = T::one() / T::lit(ky as f64).sqrt();
    CVector::from_fn(kx * ky, |i, _| {
        let a = T::lit((i / ky) as f64);
        let b = T::lit((i % ky) as f64);
        cpolar(nx * ny, step_x * a + step_y * b)
    })
}

/// Direct UE-BS channel: Rician mix of a steering-vector line of sight
/// (scaled so both components carry mean power `L`) and correlated Rayleigh
/// scattering.
pub fn direct_channel<T: Scalar, R: Rng + ?Sized>(
    beta: T,
    kappa: T,
    correlation_sqrt: &CMatrix<T>,
    comps: &PathComponents<T>,
    geometry: &Geometry<T>,
    rng: &mut R,
) -> CVector<T> {
    let l = geometry.bs_antennas;
    let eta = (kappa / (kappa + T::one())).sqrt();
    let eta_bar = (T::one() / (kappa + T::one())).sqrt();
    let half = T::lit(0.5).sqrt();

    let a = ula_response(
        comps.bs_aoa,
        l,
        geometry.bs_spacing,
        geometry.carrier_wavelength,
    );
    let los = a.scale(T::lit(l as f64).sqrt()) * cpolar(T::one(), comps.los_phase);

    let g = CVector::<T>::from_fn(l, |_, _| {
        Complex::new(T::standard_normal(rng) * half, T::standard_normal(rng) * half)
    });
    let nlos = correlation_sqrt * g;

    (los.scale(eta) + nlos.scale(eta_bar)).scale(beta.sqrt())
}

/// UE-RIS channel: finite sum of scaled UPA steering vectors.
pub fn ue_ris_channel<T: Scalar>(
    beta: T,
    comps: &PathComponents<T>,
    geometry: &Geometry<T>,
) -> CVector<T> {
    let k = geometry.ris_elements();
    let mut h = CVector::<T>::zeros(k);
    for s in 0..comps.gains.len() {
        let a = upa_response(
            comps.ris_azimuth[s],
            comps.ris_zenith[s],
            geometry.ris_shape,
            geometry.ris_spacings,
            geometry.carrier_wavelength,
        );
        h += a * comps.gains[s];
    }
    h.scale(beta.sqrt())
}

/// RIS-BS channel: finite sum of BS-steering times RIS-steering outer
/// products.
pub fn ris_bs_channel<T: Scalar>(
    beta: T,
    comps: &PathComponents<T>,
    geometry: &Geometry<T>,
) -> CMatrix<T> {
    let l = geometry.bs_antennas;
    let k = geometry.ris_elements();
    let mut g = CMatrix::<T>::zeros(l, k);
    for s in 0..comps.gains.len() {
        let a_bs = ula_response(
            comps.bs_path_aoa[s],
            l,
            geometry.bs_spacing,
            geometry.carrier_wavelength,
        );
        let a_ris = upa_response(
            comps.ris_azimuth[s],
            comps.ris_zenith[s],
            geometry.ris_shape,
            geometry.ris_spacings,
            geometry.carrier_wavelength,
        );
        let outer = (a_bs * a_ris.adjoint()).map(|z| z * comps.gains[s]);
        g += outer;
    }
    g.map(|z| z.scale(beta.sqrt()))
}

/// One block's channel realization for every link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Scalar> {
    pub n_ues: usize,
    pub n_bss: usize,
    /// Direct channels, `n * n_bss + m`.
    pub direct: Vec<CVector<T>>,
    /// UE-RIS channels per UE.
    pub ue_ris: Vec<CVector<T>>,
    /// RIS-BS channels per BS.
    pub ris_bs: Vec<CMatrix<T>>,
}

impl<T: Scalar> ChannelSet<T> {
    pub fn direct(&self, n: usize, m: usize) -> &CVector<T> {
        &self.direct[n * self.n_bss + m]
    }

    /// Effective uplink channel `h_d + G diag(φ) h_r`.
    pub fn effective(&self, phi: &CVector<T>, n: usize, m: usize) -> CVector<T> {
        effective_channel(self, phi, n, m)
    }

    /// Copy with the cascade removed (zero RIS-BS channels); phases become
    /// irrelevant on the result.
    pub fn without_cascade(&self) -> Self {
        let mut out = self.clone();
        for g in &mut out.ris_bs {
            g.fill(Complex::new(T::zero(), T::zero()));
        }
        out
    }
}

/// Effective uplink channel `h_d + G diag(φ) h_r` for the pair `(n, m)`.
pub fn effective_channel<T: Scalar>(
    ch: &ChannelSet<T>,
    phi: &CVector<T>,
    n: usize,
    m: usize,
) -> CVector<T> {
    let reflected = phi.component_mul(&ch.ue_ris[n]);
    ch.direct(n, m) + &ch.ris_bs[m] * reflected
}

/// Draws one block's channels for every link from the given statistics.
pub fn draw_channel_set<T: Scalar, R: Rng + ?Sized>(
    geometry: &Geometry<T>,
    stats: &LinkStatistics<T>,
    rng: &mut R,
) -> ChannelSet<T> {
    let n_ues = geometry.n_ues();
    let n_bss = geometry.n_bss();

    let mut direct = Vec::with_capacity(n_ues * n_bss);
    for n in 0..n_ues {
        for m in 0..n_bss {
            let aoa = geometry.bs_aoa(m, &geometry.ue_positions[n]);
            let comps = draw_direct_components(aoa, rng);
            direct.push(direct_channel(
                stats.beta_direct[n * n_bss + m],
                stats.rician_kappa[n * n_bss + m],
                &stats.bs_correlation_sqrt,
                &comps,
                geometry,
                rng,
            ));
        }
    }

    let mut ue_ris = Vec::with_capacity(n_ues);
    for n in 0..n_ues {
        let (az, zen) = geometry.ris_angles(&geometry.ue_positions[n]);
        let comps = draw_ris_components(
            az,
            zen,
            T::zero(),
            stats.paths_ue_ris,
            stats.kappa_ris,
            stats.angle_spread,
            rng,
        );
        ue_ris.push(ue_ris_channel(stats.beta_ue_ris[n], &comps, geometry));
    }

    let mut ris_bs = Vec::with_capacity(n_bss);
    for m in 0..n_bss {
        let (az, zen) = geometry.ris_angles(&geometry.bs_positions[m]);
        let aoa = geometry.bs_aoa(m, &geometry.ris_position);
        let comps = draw_ris_components(
            az,
            zen,
            aoa,
            stats.paths_ris_bs,
            stats.kappa_ris,
            stats.angle_spread,
            rng,
        );
        ris_bs.push(ris_bs_channel(stats.beta_ris_bs[m], &comps, geometry));
    }

    ChannelSet {
        n_ues,
        n_bss,
        direct,
        ue_ris,
        ris_bs,
    }
}

/// Urban-macro NLoS pathloss as a linear power gain, floored by the LoS
/// model of the same family.
pub fn pathloss_uma_nlos<T: Scalar>(
    distance_3d: T,
    fc_ghz: T,
    h_bs: T,
    h_ut: T,
) -> Result<T, ChannelError> {
    let d = distance_3d.to_f64();
    if !(10.0..=5000.0).contains(&d) {
        return Err(ChannelError::PathlossDomain {
            name: "distance_3d",
            value: d,
            low: 10.0,
            high: 5000.0,
        });
    }
    let f = fc_ghz.to_f64();
    if !(f > 0.5 && f < 100.0) {
        return Err(ChannelError::PathlossDomain {
            name: "fc_ghz",
            value: f,
            low: 0.5,
            high: 100.0,
        });
    }
    let nlos = T::lit(13.54) + T::lit(39.08) * distance_3d.log10() + T::lit(20.0) * fc_ghz.log10()
        - T::lit(0.6) * (h_ut - T::lit(1.5));
    let los = pathloss_uma_los_db(distance_3d, fc_ghz, h_bs, h_ut);
    let pl_db = nlos.max(los);
    Ok(T::lit(10.0).powf(-pl_db / T::lit(10.0)))
}

/// Urban-macro LoS pathloss in dB (the NLoS floor; also the RIS-side link
/// budget).
pub fn pathloss_uma_los_db<T: Scalar>(distance_3d: T, fc_ghz: T, h_bs: T, h_ut: T) -> T {
    let dh = h_bs - h_ut;
    let d2 = (distance_3d * distance_3d - dh * dh).max(T::zero()).sqrt();
    // breakpoint with 1 m effective environment height
    let c = T::lit(299_792_458.0);
    let fc_hz = fc_ghz * T::lit(1e9);
    let hb = (h_bs - T::one()).max(T::zero());
    let hu = (h_ut - T::one()).max(T::zero());
    let d_bp = T::lit(4.0) * hb * hu * fc_hz / c;
    let base = T::lit(28.0) + T::lit(20.0) * fc_ghz.log10();
    if d2 <= d_bp || d_bp == T::zero() {
        base + T::lit(22.0) * distance_3d.log10()
    } else {
        base + T::lit(40.0) * distance_3d.log10() - T::lit(9.0) * (d_bp * d_bp + dh * dh).log10()
    }
}
