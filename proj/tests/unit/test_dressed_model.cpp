#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "spinflip/dressed_model.hpp"
#include "spinflip/errors.hpp"
#include "spinflip/hamiltonian.hpp"
#include "spinflip/units.hpp"

using namespace spinflip;

namespace {

// Lower/upper root of the 2x2 block [[0, c], [c, -delta]].
double doublet_root(double c, double delta, int sign) {
  return 0.5 * (-delta + sign * std::sqrt(delta * delta + 4.0 * c * c));
}

DressingParams fig_params() { return DressingParams::from_mhz(10.0, -5.9, 1.0); }

}  // namespace

TEST_CASE("one-atom doublet matches the quadratic-formula eigenpair") {
  for (double delta_mhz : {-20.0, -5.9, -1.0, 0.0}) {
    DressingParams p = DressingParams::from_mhz(10.0, delta_mhz, 1.0);
    const DressedAtom atom = dress_single(p);
    const double e = doublet_root(p.omega_L / 2.0, p.delta_L, -1);
    CHECK(atom.e_ls1 == doctest::Approx(e).epsilon(1e-12));
    // Eigenvector from the first row: (omega_L/2) r = e a.
    const double ratio = 2.0 * e / p.omega_L;
    const double a = 1.0 / std::sqrt(1.0 + ratio * ratio);
    CHECK(atom.amp_a == doctest::Approx(a).epsilon(1e-12));
    CHECK(atom.amp_r == doctest::Approx(ratio * a).epsilon(1e-12));
    CHECK(atom.amp_a * atom.amp_a + atom.amp_r * atom.amp_r == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(atom.gamma_eff == doctest::Approx(0.0));
  }
}

TEST_CASE("blockaded pair doublet and entangling energy against the 2x2 oracle") {
  const DressingParams p = fig_params();
  const DressedPair pair = dress_pair(p);
  const double c = std::sqrt(2.0) * p.omega_L / 2.0;
  const double e2 = doublet_root(c, p.delta_L, -1);
  const double e1 = doublet_root(p.omega_L / 2.0, p.delta_L, -1);
  CHECK(pair.e_ls2 == doctest::Approx(e2).epsilon(1e-12));
  CHECK(pair.j == doctest::Approx(e2 - 2.0 * e1).epsilon(1e-12));
  CHECK(entangling_energy(p) == doctest::Approx(e2 - 2.0 * e1).epsilon(1e-12));
  CHECK(pair.gamma == 0.0);
  const double ratio = e2 / c;
  CHECK(pair.beta / pair.alpha == doctest::Approx(ratio).epsilon(1e-10));
}

TEST_CASE("working point values quoted for the 10 MHz / -5.9 MHz dressing") {
  const DressingParams p = fig_params();
  // J/2pi = 0.999 MHz within 1%.
  CHECK(to_mhz(entangling_energy(p)) == doctest::Approx(0.999).epsilon(0.01));
}

TEST_CASE("resonant entangling energy reaches (2 - sqrt 2) Omega_L / 2") {
  for (double omega : {1.0, 10.0, 63.0}) {
    DressingParams p;
    p.omega_L = omega;
    p.delta_L = 0.0;
    const double expected = (2.0 - std::sqrt(2.0)) * omega / 2.0;
    CHECK(std::abs(entangling_energy(p)) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(strong_dressing_asymptotics(omega).j_max == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("finite blockade converges to the perfect blockade and vanishes at V = 0") {
  DressingParams p = fig_params();
  const double j_inf = entangling_energy(p);
  p.v_rr = Interaction::finite(1e4 * p.omega_L);
  CHECK(std::abs(entangling_energy(p) - j_inf) < 1e-3 * p.omega_L);
  p.v_rr = Interaction::finite(0.0);
  CHECK(std::abs(entangling_energy(p)) < 1e-10 * p.omega_L);
}

TEST_CASE("upper branch is the mirror image of the lower branch") {
  const double omega = 3.0;
  for (double delta : {-4.0, -1.0, -0.2}) {
    const double lower = entangling_energy_closed_form(omega, delta, Branch::Lower);
    const double upper = entangling_energy_closed_form(omega, -delta, Branch::Upper);
    CHECK(upper == doctest::Approx(-lower).epsilon(1e-13));
    DressingParams p;
    p.omega_L = omega;
    p.delta_L = -delta;
    p.branch = Branch::Upper;
    CHECK(dress_pair(p).j == doctest::Approx(upper).epsilon(1e-12));
  }
}

TEST_CASE("weak dressing limit of J") {
  const double omega = 1.0;
  const double delta = -40.0;
  const double exact = entangling_energy_closed_form(omega, delta, Branch::Lower);
  const double weak = weak_dressing_entangling_energy(omega, delta);
  CHECK(std::abs(exact) == doctest::Approx(std::abs(weak)).epsilon(0.01));
}

TEST_CASE("detuning for a target J inverts the closed form") {
  const double omega = from_mhz(10.0);
  for (double target_mhz : {0.1, 1.0, 2.5}) {
    const auto d = detuning_for_entangling_energy(omega, from_mhz(target_mhz));
    REQUIRE(d.has_value());
    CHECK(*d <= 0.0);
    CHECK(entangling_energy_closed_form(omega, *d, Branch::Lower) ==
          doctest::Approx(from_mhz(target_mhz)).epsilon(1e-9));
  }
  CHECK_FALSE(detuning_for_entangling_energy(omega, 0.5 * omega).has_value());
}

TEST_CASE("dressed microwave couplings from the bare two-atom Hamiltonian") {
  DressingParams p = fig_params();
  const DressedAtom atom = dress_single(p);
  const DressedPair pair = dress_pair(p);

  const Basis b = two_atom_basis(single_atom_basis(), true);
  const OperatorMatrix h = two_atom_hamiltonian(p, 0.0);
  // Microwave part only: the difference to the undriven Hamiltonian.
  DressingParams dark = p;
  dark.omega_mw = 0.0;
  const Eigen::MatrixXcd hmw = h.matrix - two_atom_hamiltonian(dark, 0.0).matrix;

  auto v = [&](const char* l) { return basis_vector(b, l); };
  const Eigen::VectorXcd a1 = atom.amp_a * v("a1") + atom.amp_r * v("r1");
  const Eigen::VectorXcd one_a = atom.amp_a * v("1a") + atom.amp_r * v("1r");
  const Eigen::VectorXcd a0 = atom.amp_a * v("a0") + atom.amp_r * v("r0");
  CHECK(2.0 * std::abs(a0.dot(hmw * v("10"))) == doctest::Approx(atom.omega_mw_eff).epsilon(1e-12));

  const Eigen::VectorXcd sym = (one_a + a1) / std::sqrt(2.0);
  const Eigen::VectorXcd aa = pair.alpha * v("aa") +
                              pair.beta * (v("ar") + v("ra")) / std::sqrt(2.0);
  // |aa~> <- |1a~>_+ carries an extra sqrt 2 from the two paths.
  CHECK(2.0 * std::abs(aa.dot(hmw * sym)) / std::sqrt(2.0) ==
        doctest::Approx(pair.omega_mw_eff_prime).epsilon(1e-12));
}

TEST_CASE("decay rates of the dressed states") {
  DressingParams p = fig_params();
  p.gamma_r = 1.0 / 150.0;
  const DressedAtom atom = dress_single(p);
  const DressedPair pair = dress_pair(p);
  CHECK(atom.gamma_eff / p.gamma_r == doctest::Approx(atom.amp_r * atom.amp_r));
  CHECK(pair.gamma_eff_2 / p.gamma_r == doctest::Approx(pair.beta * pair.beta));
}

TEST_CASE("invalid dressing parameters name the field") {
  DressingParams p = fig_params();
  p.omega_L = -1.0;
  try {
    p.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    CHECK(e.field() == "omega_L");
  }
  p = fig_params();
  p.v_rr = Interaction::finite(-2.0);
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK_THROWS_AS(Interaction::infinite().value(), Error);
}
