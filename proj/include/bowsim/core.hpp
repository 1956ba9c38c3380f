#ifndef BOWSIM_CORE_HPP
#define BOWSIM_CORE_HPP

#include <stdexcept>
#include <string>

namespace bowsim {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// rho = 0 means the particle is disconnected from the string; the coherence
/// length is undefined and callers must branch to the free-WKB path.
struct InfiniteCoherenceError : ModelError {
    using ModelError::ModelError;
};

/// Particle of mass m in a delta well of depth scale V, attached to an elastic
/// string of mass density rho and sound speed s. Immutable after construction.
struct StringModel {
    double m = 1.0;      // particle mass
    double V = 0.5;      // barrier height
    double rho = 0.05;   // string mass density
    double s = 1.0;      // sound speed
    double hbar = 1.0;

    double gamma() const { return 2.0 * rho * s / m; }

    // small-friction (semiclassical) regime: hbar*gamma < V
    bool semiclassical() const { return hbar * gamma() < V; }

    void validate() const;

    /// Parse from a JSON document with keys {"m","V","rho","s","hbar"};
    /// "hbar" is optional and defaults to 1.
    static StringModel from_json_text(const std::string& text);
};

struct Scales {
    double gamma;  // damping, 2*rho*s/m
    double xi;     // coherence length, v0/(pi*gamma)
    double v0;     // launch speed, sqrt(2V/m)
    double xi_q;   // quantum coherence limit, sqrt(hbar/(m*gamma))
    bool semiclassical;
};

Scales derive_scales(const StringModel& model);

enum class Quantity { time, length, energy, velocity, action };

/// Linear rescaling between lab quantities and the reduced system
/// (time*gamma, length/xi, energy/V, velocity/(gamma*xi), action/hbar).
struct ReducedUnits {
    explicit ReducedUnits(const StringModel& model);

    double to_reduced(double value, Quantity kind) const;
    double from_reduced(double value, Quantity kind) const;

    const Scales& scales() const { return scales_; }
    double V() const { return V_; }
    double hbar() const { return hbar_; }

  private:
    double factor(Quantity kind) const;
    Scales scales_;
    double V_;
    double hbar_;
};

} // namespace bowsim

#endif
