use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{dft_matrix, diagonalize_circulant, ChannelRealization, DftMatrix};
use crate::sim::SystemConfig;

/// One received block in the frequency domain plus the per-scenario views the
/// estimators consume.
#[derive(Debug, Clone)]
pub struct ScenarioFrame {
    pub block_index: usize,
    /// Transmitted BPSK symbols, one row per user.
    pub tx_bits: DMatrix<f64>,
    /// Frequency-domain received block (M entries).
    pub z_freq: DVector<Complex64>,
    /// Channel-estimation view: diag(F·x₁), the desired user's post-DFT chip
    /// spectrum.
    pub delta_diag: Option<DVector<Complex64>>,
    /// Receiver view: the N×M data matrix multiplying the equivalent filter.
    pub y_mat: Option<DMatrix<Complex64>>,
    /// Per-bin noise variance used for this block.
    pub sigma2: f64,
}

/// Precomputed per-(system, channel) quantities shared by every block of a
/// scenario: DFT operators, spreading-code spectra, channel eigenvalues and
/// the noise level matching the configured SNR.
#[derive(Debug, Clone)]
pub struct LinkContext {
    cfg: SystemConfig,
    channel: ChannelRealization,
    dft_m: DftMatrix,
    f_n: DMatrix<Complex64>,
    /// Channel eigenvalues h̃ (diagonal of F·H·Fᴴ).
    h_tilde: DVector<Complex64>,
    /// Per-user spreading-code spectra s̃_k (diagonal of F·S_k·Fᴴ).
    code_spectra: Vec<DVector<Complex64>>,
    /// Per-user code chips as complex ±1.
    codes: Vec<DVector<Complex64>>,
    /// λ_k = h̃ ⊙ s̃_k, the diagonal of F·H·S_k·Fᴴ.
    lambda: Vec<DVector<Complex64>>,
    signal_power: f64,
    sigma2: f64,
}

impl LinkContext {
    pub fn new(cfg: &SystemConfig, channel: &ChannelRealization) -> Result<Self> {
        cfg.validate()?;
        cfg.validate_channel(channel)?;
        let m = cfg.block_chips();
        let n = cfg.symbols_per_block;
        let nc = cfg.spreading_gain;

        let dft_m = dft_matrix(m)?;
        let f_n = dft_matrix(n)?.as_matrix().clone();
        let h_tilde = diagonalize_circulant(channel.taps().as_slice(), m)?;

        let walsh = crate::numerics::walsh_codes(nc)?;
        let mut codes = Vec::with_capacity(cfg.users);
        let mut code_spectra = Vec::with_capacity(cfg.users);
        let mut lambda = Vec::with_capacity(cfg.users);
        for user in 0..cfg.users {
            // Column 0 (all ones) is reserved; user k takes column k+1.
            let col = walsh.column(user + 1);
            let code = DVector::from_fn(nc, |c, _| Complex64::new(col[c] as f64, 0.0));
            let spectrum = diagonalize_circulant(code.as_slice(), m)?;
            let lam = DVector::from_fn(m, |a, _| h_tilde[a] * spectrum[a]);
            codes.push(code);
            code_spectra.push(spectrum);
            lambda.push(lam);
        }

        // Expected received power of the desired user over one block:
        // E||H·D₁·b||² = (N/M)·Σ_a |h̃_a·σ₁(a)|², with σ₁ the code spectrum.
        let signal_power: f64 = (0..m)
            .map(|a| (h_tilde[a] * code_spectra[0][a]).norm_sqr())
            .sum::<f64>()
            * n as f64
            / m as f64;
        let snr_lin = 10f64.powf(cfg.snr_db / 10.0);
        let sigma2 = signal_power / (m as f64 * snr_lin);

        Ok(Self {
            cfg: cfg.clone(),
            channel: channel.clone(),
            dft_m,
            f_n,
            h_tilde,
            code_spectra,
            codes,
            lambda,
            signal_power,
            sigma2,
        })
    }

    /// Overrides the noise level implied by the configured SNR; σ² = 0 turns
    /// the link exactly noiseless.
    pub fn with_sigma2(mut self, sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) {
            return Err(Error::InvalidParameter(
                "noise variance must be >= 0".into(),
            ));
        }
        self.sigma2 = sigma2;
        Ok(self)
    }

    pub fn cfg(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn channel(&self) -> &ChannelRealization {
        &self.channel
    }

    pub fn dft(&self) -> &DftMatrix {
        &self.dft_m
    }

    /// Symbol-rate DFT matrix F_N.
    pub fn dft_n(&self) -> &DMatrix<Complex64> {
        &self.f_n
    }

    pub fn h_tilde(&self) -> &DVector<Complex64> {
        &self.h_tilde
    }

    pub fn lambda(&self, user: usize) -> &DVector<Complex64> {
        &self.lambda[user]
    }

    pub fn code(&self, user: usize) -> &DVector<Complex64> {
        &self.codes[user]
    }

    /// Per-bin noise variance realizing the configured SNR.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn signal_power(&self) -> f64 {
        self.signal_power
    }

    /// Chip-rate spread signal of one user, x_k = D_k b_k.
    pub fn spread(&self, user: usize, bits: &DVector<f64>) -> DVector<Complex64> {
        let n = self.cfg.symbols_per_block;
        let nc = self.cfg.spreading_gain;
        debug_assert_eq!(bits.len(), n);
        let mut x = DVector::zeros(n * nc);
        for sym in 0..n {
            for chip in 0..nc {
                x[sym * nc + chip] = self.codes[user][chip] * bits[sym];
            }
        }
        x
    }

    /// Random ±1 BPSK block for all users, one row per user.
    pub fn random_bits<R: Rng>(&self, rng: &mut R) -> DMatrix<f64> {
        DMatrix::from_fn(self.cfg.users, self.cfg.symbols_per_block, |_, _| {
            if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        })
    }

    /// F·x_k without the chip-rate detour: the symbol spectrum expanded over
    /// the Nc code repetitions and shaped by the code spectrum,
    /// F·x_k = s̃_k ⊙ (I_e F_N b_k) / √Nc.
    fn user_chip_spectrum(&self, user: usize, bits: &DVector<f64>) -> DVector<Complex64> {
        let n = self.cfg.symbols_per_block;
        let m = self.cfg.block_chips();
        let b = DVector::from_fn(n, |i, _| Complex64::new(bits[i], 0.0));
        let fb = &self.f_n * b;
        let scale = 1.0 / (self.cfg.spreading_gain as f64).sqrt();
        DVector::from_fn(m, |a, _| self.code_spectra[user][a] * fb[a % n] * scale)
    }

    /// Frequency-domain AWGN, F applied to a time-domain circular Gaussian
    /// draw of per-sample variance σ².
    fn noise_freq<R: Rng>(&self, rng: &mut R) -> DVector<Complex64> {
        let m = self.cfg.block_chips();
        let scale = (self.sigma2 / 2.0).sqrt();
        let time = DVector::from_fn(m, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        });
        self.dft_m.as_matrix() * time
    }

    fn received(
        &self,
        bits: &DMatrix<f64>,
        rng: &mut impl Rng,
    ) -> (DVector<Complex64>, DVector<Complex64>) {
        let m = self.cfg.block_chips();
        let mut fx_total: DVector<Complex64> = DVector::zeros(m);
        let mut fx_user1 = DVector::zeros(m);
        for user in 0..self.cfg.users {
            let fx = self.user_chip_spectrum(user, &bits.row(user).transpose());
            if user == 0 {
                fx_user1 = fx.clone();
            }
            fx_total += fx;
        }
        let mut z = self.noise_freq(rng);
        for a in 0..m {
            z[a] += self.h_tilde[a] * fx_total[a];
        }
        (z, fx_user1)
    }

    /// One block of the channel-estimation scenario.
    pub fn transmit_sce<R: Rng>(
        &self,
        block_index: usize,
        bits: &DMatrix<f64>,
        rng: &mut R,
    ) -> Result<ScenarioFrame> {
        self.check_bits(bits)?;
        let (z, fx_user1) = self.received(bits, rng);
        Ok(ScenarioFrame {
            block_index,
            tx_bits: bits.clone(),
            z_freq: z,
            delta_diag: Some(fx_user1),
            y_mat: None,
            sigma2: self.sigma2,
        })
    }

    /// One block of the interference-suppression scenario.
    pub fn transmit_receiver<R: Rng>(
        &self,
        block_index: usize,
        bits: &DMatrix<f64>,
        rng: &mut R,
    ) -> Result<ScenarioFrame> {
        self.check_bits(bits)?;
        let (z, _) = self.received(bits, rng);
        let y = self.data_matrix(&z);
        Ok(ScenarioFrame {
            block_index,
            tx_bits: bits.clone(),
            z_freq: z,
            delta_diag: None,
            y_mat: Some(y),
            sigma2: self.sigma2,
        })
    }

    /// Y = F_Nᴴ I_eᴴ diag(z), the N×M matrix through which the equivalent
    /// M-tap receive filter sees one block.
    pub fn data_matrix(&self, z: &DVector<Complex64>) -> DMatrix<Complex64> {
        let n = self.cfg.symbols_per_block;
        let m = self.cfg.block_chips();
        DMatrix::from_fn(n, m, |row, col| self.f_n[(col % n, row)].conj() * z[col])
    }

    fn check_bits(&self, bits: &DMatrix<f64>) -> Result<()> {
        if bits.nrows() != self.cfg.users || bits.ncols() != self.cfg.symbols_per_block {
            return Err(Error::DimensionMismatch(format!(
                "bit matrix is {}x{}, expected {}x{}",
                bits.nrows(),
                bits.ncols(),
                self.cfg.users,
                self.cfg.symbols_per_block
            )));
        }
        Ok(())
    }
}

/// Convenience wrappers building a fresh context per call; scenario loops
/// should construct a [`LinkContext`] once instead.
pub fn transmit_sce<R: Rng>(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    bits: &DMatrix<f64>,
    rng: &mut R,
) -> Result<ScenarioFrame> {
    LinkContext::new(cfg, ch)?.transmit_sce(0, bits, rng)
}

pub fn transmit_receiver<R: Rng>(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    bits: &DMatrix<f64>,
    rng: &mut R,
) -> Result<ScenarioFrame> {
    LinkContext::new(cfg, ch)?.transmit_receiver(0, bits, rng)
}
