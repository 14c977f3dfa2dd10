#pragma once

#include <algorithm>

#include "nullknot/core.hpp"
#include "nullknot/diagnostics.hpp"

// Poynting-flow quantities V = (E x B)/W, W = (E^2 + B^2)/2, Omega = curl V,
// and the transport/conservation residuals of the pressureless-Euler analogy:
// Euler, energy continuity, transport of E/W, B/W, Omega/W, and the
// helicity-density law d_t(V.Omega) + div(V (V.Omega)) = 0.
//
// Spatial derivatives are exact (dual propagation, second order via nested
// duals); time derivatives use a 4th-order finite-difference stencil on the
// analytic field.

namespace nullknot {

struct FlowState {
  Vec3R V;
  double W{};
  Vec3R Omega;
  Mat3R JV;  // JV[i][j] = d_j V_i
};

namespace detail {

/// First-order flow quantities assembled from a field jet.
struct FlowVals {
  Vec3R V, Omega, BW, EW, OW;
  double W{};
  Mat3R JV;
  Mat3R JBW, JEW;
  Vec3R gradW;
  double h{};  // V . Omega
};

inline FlowVals flow_vals(const FieldJet1& jet, double w_floor) {
  const Vec3R E = real(jet.F), B = imag(jet.F);
  const Mat3R JE = real(jet.J), JB = imag(jet.J);
  FlowVals fv;
  fv.W = 0.5 * (dot(E, E) + dot(B, B));
  if (fv.W < w_floor) throw DegenerateFlowError("flow: W below threshold");
  for (int j = 0; j < 3; ++j) {
    double g = 0;
    for (int i = 0; i < 3; ++i) g += E[i] * JE[i][j] + B[i] * JB[i][j];
    fv.gradW[j] = g;
  }
  const Vec3R S = cross(E, B);
  fv.V = S / fv.W;
  for (int j = 0; j < 3; ++j) {
    const Vec3R dE{JE[0][j], JE[1][j], JE[2][j]};
    const Vec3R dB{JB[0][j], JB[1][j], JB[2][j]};
    const Vec3R dS = cross(dE, B) + cross(E, dB);
    for (int i = 0; i < 3; ++i) {
      fv.JV[i][j] = dS[i] / fv.W - S[i] * fv.gradW[j] / (fv.W * fv.W);
      fv.JBW[i][j] = JB[i][j] / fv.W - B[i] * fv.gradW[j] / (fv.W * fv.W);
      fv.JEW[i][j] = JE[i][j] / fv.W - E[i] * fv.gradW[j] / (fv.W * fv.W);
    }
  }
  fv.Omega = curl_from_jacobian(fv.JV);
  fv.BW = B / fv.W;
  fv.EW = E / fv.W;
  fv.OW = fv.Omega / fv.W;
  fv.h = dot(fv.V, fv.Omega);
  return fv;
}

/// Second-order pieces: grad(Omega/W) contracted with V, and div(V h).
/// Rebuilt as nested duals from the exact field jet2 so no finite
/// differencing enters the spatial part.
struct FlowVals2 {
  Vec3R V_grad_OW;  // (V . grad)(Omega/W)
  double div_Vh{};  // div(V (V.Omega))
};

inline FlowVals2 flow_vals2(const FieldJet2& jet, double w_floor) {
  using D1 = Dual<double, 3>;
  using D2 = Dual<D1, 3>;

  // Pack value/gradient/Hessian of Re F and Im F into nested duals.
  Vec3<D2> E, B;
  for (int i = 0; i < 3; ++i) {
    D2 e, b;
    e.v.v = jet.F[i].real();
    b.v.v = jet.F[i].imag();
    for (int j = 0; j < 3; ++j) {
      e.v.d[j] = jet.J[i][j].real();
      b.v.d[j] = jet.J[i][j].imag();
      e.d[j].v = jet.J[i][j].real();
      b.d[j].v = jet.J[i][j].imag();
      for (int k = 0; k < 3; ++k) {
        e.d[j].d[k] = jet.H[j][i][k].real();
        b.d[j].d[k] = jet.H[j][i][k].imag();
      }
    }
    E[i] = e;
    B[i] = b;
  }

  const D2 W = 0.5 * (dot(E, E) + dot(B, B));
  if (W.v.v < w_floor) throw DegenerateFlowError("flow: W below threshold");
  const Vec3<D2> V = cross(E, B) / W;

  auto lower = [](const D2& x) {
    D1 r(x.v.v);
    for (int j = 0; j < 3; ++j) r.d[j] = x.d[j].v;
    return r;
  };

  // Omega_i = eps_ijk d_j V_k: each entry a Dual carrying its own gradient.
  const Vec3<D1> Omega{V.z.d[1] - V.y.d[2], V.x.d[2] - V.z.d[0], V.y.d[0] - V.x.d[1]};
  const D1 W1 = lower(W);
  const Vec3<D1> OW = Omega / W1;
  const Vec3<D1> V1{lower(V.x), lower(V.y), lower(V.z)};
  const D1 h = dot(V1, Omega);

  FlowVals2 out;
  for (int i = 0; i < 3; ++i) {
    double acc = 0;
    for (int j = 0; j < 3; ++j) acc += V1[j].v * OW[i].d[j];
    out.V_grad_OW[i] = acc;
  }
  double div = 0;
  for (int i = 0; i < 3; ++i) {
    const D1 vh = V1[i] * h;
    div += vh.d[i];
  }
  out.div_Vh = div;
  return out;
}

inline double fd4(double fp2, double fp1, double fm1, double fm2, double h) {
  return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
}

}  // namespace detail

inline FlowState flow_state(const AnalyticField& field, const Point4& p, double w_floor = 1e-12) {
  const detail::FlowVals fv = detail::flow_vals(field.jet1(p), w_floor);
  return {fv.V, fv.W, fv.Omega, fv.JV};
}

/// Residuals of every transport/conservation law, each normalized by the max
/// magnitude of its constituent terms (scale-free pass/fail).
struct TransportResidualReport {
  Vec3R euler;             // d_t V + (V.grad)V
  double continuity{};     // d_t W + div(W V)
  Vec3R transport_B;       // d_t(B/W) + (V.grad)(B/W) - ((B/W).grad)V
  Vec3R transport_E;       // same for E/W
  Vec3R transport_Omega;   // same for Omega/W
  double helicity_density{};  // d_t h + div(V h), h = V.Omega

  double max_norm() const {
    return std::max({norm(euler), std::abs(continuity), norm(transport_B), norm(transport_E),
                     norm(transport_Omega), std::abs(helicity_density)});
  }
};

inline TransportResidualReport transport_residuals(const AnalyticField& field, const Point4& p,
                                                   double h_t = 1e-4, double w_floor = 1e-12) {
  using detail::flow_vals;
  const detail::FlowVals c = flow_vals(field.jet1(p), w_floor);
  const detail::FlowVals2 c2 = detail::flow_vals2(field.jet2(p), w_floor);

  auto shifted = [&](double dt) {
    Point4 q = p;
    q.t += dt;
    return flow_vals(field.jet1(q), w_floor);
  };
  const detail::FlowVals p2 = shifted(2 * h_t), p1 = shifted(h_t), m1 = shifted(-h_t),
                         m2 = shifted(-2 * h_t);

  auto dt_vec = [&](auto sel) {
    Vec3R r;
    for (int i = 0; i < 3; ++i)
      r[i] = detail::fd4(sel(p2)[i], sel(p1)[i], sel(m1)[i], sel(m2)[i], h_t);
    return r;
  };

  TransportResidualReport rep;

  // Each scale gets an absolute floor tied to the natural magnitude of the
  // transported quantity.  Without it, a law whose terms individually vanish
  // (e.g. a flow that is exactly stationary) would divide finite-difference
  // noise by itself and report an order-one residual.
  constexpr double kNoiseFloor = 1e-8;

  {  // Euler
    const Vec3R dtV = dt_vec([](const detail::FlowVals& f) { return f.V; });
    const Vec3R adv = detail::directional(c.V, c.JV);
    const double scale =
        std::max({norm(dtV), norm(adv), kNoiseFloor * (1.0 + norm(c.V))});
    rep.euler = (dtV + adv) / scale;
  }
  {  // continuity
    const double dtW = detail::fd4(p2.W, p1.W, m1.W, m2.W, h_t);
    const double divWV = dot(c.gradW, c.V) + c.W * trace(c.JV);
    const double scale =
        std::max({std::abs(dtW), std::abs(divWV), kNoiseFloor * (1.0 + c.W)});
    rep.continuity = (dtW + divWV) / scale;
  }
  auto lie_residual = [&](const Vec3R& dtX, const Vec3R& X, const Mat3R& JX) {
    const Vec3R adv = detail::directional(c.V, JX);
    const Vec3R stretch = detail::directional(X, c.JV);
    const double scale =
        std::max({norm(dtX), norm(adv), norm(stretch), kNoiseFloor * (1.0 + norm(X))});
    return (dtX + adv - stretch) / scale;
  };
  rep.transport_B = lie_residual(dt_vec([](const detail::FlowVals& f) { return f.BW; }), c.BW, c.JBW);
  rep.transport_E = lie_residual(dt_vec([](const detail::FlowVals& f) { return f.EW; }), c.EW, c.JEW);
  {  // Omega/W transport, spatial gradient via nested duals
    const Vec3R dtOW = dt_vec([](const detail::FlowVals& f) { return f.OW; });
    const Vec3R stretch = detail::directional(c.OW, c.JV);
    const double scale = std::max(
        {norm(dtOW), norm(c2.V_grad_OW), norm(stretch), kNoiseFloor * (1.0 + norm(c.OW))});
    rep.transport_Omega = (dtOW + c2.V_grad_OW - stretch) / scale;
  }
  {  // helicity density
    const double dth = detail::fd4(p2.h, p1.h, m1.h, m2.h, h_t);
    const double scale =
        std::max({std::abs(dth), std::abs(c2.div_Vh), kNoiseFloor * (1.0 + std::abs(c.h))});
    rep.helicity_density = (dth + c2.div_Vh) / scale;
  }
  return rep;
}

/// Lemma-1 straight-line flow map: (0, x0) -> (tau, x0 + tau V0(x0)).
inline Point4 straight_line_flow_map(const AnalyticField& field, const Vec3R& x0, double tau,
                                     double w_floor = 1e-12) {
  const FlowState fs = flow_state(field, at(0.0, x0), w_floor);
  return at(tau, x0 + tau * fs.V);
}

/// |V(tau, x0 + tau V0(x0)) - V0(x0)|; zero for null shear-free fields.
inline double geodesic_invariance_check(const AnalyticField& field, const Vec3R& x0, double tau,
                                        double w_floor = 1e-12) {
  const FlowState start = flow_state(field, at(0.0, x0), w_floor);
  const Point4 end = at(tau, x0 + tau * start.V);
  const FlowState there = flow_state(field, end, w_floor);
  return norm(there.V - start.V);
}

}  // namespace nullknot
