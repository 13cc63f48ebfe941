#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

// Shared domain types for the Clauser-Horne toolkit: the two-photon state
// (|HH> + f|VV>)/sqrt(1+|f|^2), analyzer settings, polarizer transmissions
// and the detector model. All types are immutable after construction and
// validate their invariants in the constructor.

namespace chbell {

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NoViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ManifestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UndefinedValueError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two-photon polarization state (|HH> + f |VV>) / sqrt(1 + |f|^2).
/// f = 1 is maximally entangled, f = 0 a product state.
class EntangledState {
  public:
    EntangledState(double f_re, double f_im = 0.0) : f_re_(f_re), f_im_(f_im) {
        if (!std::isfinite(f_re) || !std::isfinite(f_im))
            throw ValidationError("EntangledState: f must be finite");
        norm_ = 1.0 + f_re * f_re + f_im * f_im;
    }

    double f_re() const { return f_re_; }
    double f_im() const { return f_im_; }
    double f_abs2() const { return f_re_ * f_re_ + f_im_ * f_im_; }
    /// 1 + |f|^2, cached at construction.
    double norm() const { return norm_; }
    /// f + f*, the coefficient of the interference term.
    double f_plus_conj() const { return 2.0 * f_re_; }
    /// |f| = 0 means no entanglement at all.
    bool is_product() const { return f_re_ == 0.0 && f_im_ == 0.0; }

  private:
    double f_re_, f_im_, norm_;
};

/// Intensity transmissions of a real polarizer: eps_par along the analyzer
/// axis, eps_perp normal to it. 0 <= eps_perp <= eps_par <= 1.
class Polarizer {
  public:
    Polarizer(double eps_par, double eps_perp) : eps_par_(eps_par), eps_perp_(eps_perp) {
        if (!std::isfinite(eps_par) || eps_par < 0.0 || eps_par > 1.0)
            throw ValidationError("Polarizer: eps_par must be in [0, 1], got " +
                                  std::to_string(eps_par));
        if (!std::isfinite(eps_perp) || eps_perp < 0.0 || eps_perp > 1.0)
            throw ValidationError("Polarizer: eps_perp must be in [0, 1], got " +
                                  std::to_string(eps_perp));
        if (eps_perp > eps_par)
            throw ValidationError("Polarizer: eps_perp (" + std::to_string(eps_perp) +
                                  ") must not exceed eps_par (" + std::to_string(eps_par) + ")");
    }

    static Polarizer ideal() { return Polarizer(1.0, 0.0); }

    double eps_par() const { return eps_par_; }
    double eps_perp() const { return eps_perp_; }

  private:
    double eps_par_, eps_perp_;
};

inline Polarizer validate_polarizer(double eps_par, double eps_perp) {
    return Polarizer(eps_par, eps_perp);
}

/// One analyzer setting: either an angle in [0, 180) degrees or OPEN
/// (polarizer removed). OPEN is categorical, not a magic angle.
class Setting {
  public:
    static Setting angle(double deg) {
        if (!std::isfinite(deg) || deg < 0.0 || deg >= 180.0)
            throw ValidationError("Setting: angle must be in [0, 180) degrees, got " +
                                  std::to_string(deg));
        return Setting(false, deg);
    }
    static Setting open() { return Setting(true, 0.0); }

    bool is_open() const { return open_; }
    double degrees() const {
        if (open_) throw ValidationError("Setting: OPEN carries no angle");
        return deg_;
    }

  private:
    Setting(bool open, double deg) : open_(open), deg_(deg) {}
    bool open_;
    double deg_;
};

/// The four analysis angles of a CH run plus the polarizer on each arm.
class AnalyzerConfig {
  public:
    AnalyzerConfig(double theta1, double theta1_prime, double theta2, double theta2_prime,
                   Polarizer pol1 = Polarizer::ideal(), Polarizer pol2 = Polarizer::ideal())
        : theta1_(theta1), theta1_prime_(theta1_prime), theta2_(theta2),
          theta2_prime_(theta2_prime), pol1_(pol1), pol2_(pol2) {
        for (double a : {theta1, theta1_prime, theta2, theta2_prime})
            if (!std::isfinite(a) || a < 0.0 || a >= 180.0)
                throw ValidationError("AnalyzerConfig: angles must be in [0, 180) degrees, got " +
                                      std::to_string(a));
    }

    double theta1() const { return theta1_; }
    double theta1_prime() const { return theta1_prime_; }
    double theta2() const { return theta2_; }
    double theta2_prime() const { return theta2_prime_; }
    std::array<double, 4> angles() const { return {theta1_, theta1_prime_, theta2_, theta2_prime_}; }
    const Polarizer& pol1() const { return pol1_; }
    const Polarizer& pol2() const { return pol2_; }

  private:
    double theta1_, theta1_prime_, theta2_, theta2_prime_;
    Polarizer pol1_, pol2_;
};

/// Detector parameters. Defaults follow the measured apparatus: total
/// efficiency 0.535 per arm, dark rate 50 /s. The 10 ns coincidence window
/// and the pair rate are free parameters (not reported for the experiment).
class DetectorModel {
  public:
    DetectorModel(double eta1, double eta2, double dark1, double dark2, double pair_rate,
                  double window_ns)
        : eta1_(eta1), eta2_(eta2), dark1_(dark1), dark2_(dark2), pair_rate_(pair_rate),
          window_ns_(window_ns) {
        for (double e : {eta1, eta2})
            if (!std::isfinite(e) || e < 0.0 || e > 1.0)
                throw ValidationError("DetectorModel: eta must be in [0, 1], got " +
                                      std::to_string(e));
        for (double d : {dark1, dark2})
            if (!std::isfinite(d) || d < 0.0)
                throw ValidationError("DetectorModel: dark rate must be >= 0, got " +
                                      std::to_string(d));
        if (!std::isfinite(pair_rate) || pair_rate < 0.0)
            throw ValidationError("DetectorModel: pair_rate must be >= 0, got " +
                                  std::to_string(pair_rate));
        if (!std::isfinite(window_ns) || window_ns <= 0.0)
            throw ValidationError("DetectorModel: window must be > 0 ns, got " +
                                  std::to_string(window_ns));
    }

    static DetectorModel defaults(double pair_rate = 1e4) {
        return DetectorModel(0.535, 0.535, 50.0, 50.0, pair_rate, 10.0);
    }

    double eta1() const { return eta1_; }
    double eta2() const { return eta2_; }
    double dark1() const { return dark1_; }
    double dark2() const { return dark2_; }
    double pair_rate() const { return pair_rate_; }
    double window_ns() const { return window_ns_; }

  private:
    double eta1_, eta2_, dark1_, dark2_, pair_rate_, window_ns_;
};

inline EntangledState make_state(double f_re, double f_im = 0.0) {
    return EntangledState(f_re, f_im);
}

} // namespace chbell
