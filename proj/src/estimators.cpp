#include "poissonloc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace poissonloc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming exp-sum accumulator with a running maximum; accumulation order
// is fixed by the caller so results do not depend on threading.
struct RunningPosterior {
    double shift = kNegInf;
    double s = 0.0, sx = 0.0, sy = 0.0;

    void add(double log_w, double x, double y) {
        if (log_w == kNegInf) return;
        if (log_w > shift) {
            const double c = shift == kNegInf ? 0.0 : std::exp(shift - log_w);
            s *= c;
            sx *= c;
            sy *= c;
            shift = log_w;
        }
        const double w = std::exp(log_w - shift);
        s += w;
        sx += w * x;
        sy += w * y;
    }

    double log_total() const { return s > 0.0 ? shift + std::log(s) : kNegInf; }
};

struct CellBox {
    int ci_lo, ci_hi, ck_lo, ck_hi;  // inclusive coarse-cell index ranges
    bool covers(int cells) const {
        return ci_lo == 0 && ck_lo == 0 && ci_hi == cells - 1 && ck_hi == cells - 1;
    }
};

// Lexicographically smallest point among value ties within 1e-12.
bool improves(double cand_value, PlanePoint cand, double best_value, PlanePoint best) {
    if (cand_value > best_value + 1e-12) return true;
    if (cand_value < best_value - 1e-12) return false;
    if (cand.x != best.x) return cand.x < best.x;
    return cand.y < best.y;
}

}  // namespace

Prior Prior::uniform() { return Prior{}; }

Prior Prior::density(std::function<double(PlanePoint)> p) {
    Prior prior;
    prior.fn_ = std::move(p);
    return prior;
}

double Prior::log_at(PlanePoint theta, const ParameterRectangle& box) const {
    if (!fn_) return -std::log(box.area());
    const double p = fn_(theta);
    if (!(p > 0.0) || !std::isfinite(p))
        throw DomainError("prior: density must be strictly positive on Theta");
    return std::log(p);
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::BE: return "BE";
        case EstimatorKind::MLE: return "MLE";
        case EstimatorKind::TRILAT: return "TRILAT";
    }
    return "?";
}

EstimateResult bayes_from_log_weight(const SensorArray& array, double scale_n, double jump0,
                                     const std::function<double(PlanePoint)>& log_weight,
                                     const BayesGridPolicy& policy) {
    const auto& box = array.theta_box;
    const int cells = policy.coarse_cells;
    const double hx0 = box.width() / cells;
    const double hy0 = box.height() / cells;

    // Fine subdivision factor: smallest integer taking the coarse spacing at
    // or below 0.1 nu / (n lambda(0)); the posterior width scales like 1/n.
    int refine = 1;
    if (jump0 > 0.0) {
        const double target = 0.1 * array.nu / (scale_n * jump0);
        const double needed = std::max(hx0, hy0) / target;
        if (needed > 1.0) refine = static_cast<int>(std::min(1024.0, std::ceil(needed)));
    }

    auto coarse_center = [&](int ci, int ck) -> PlanePoint {
        return {box.alpha1 + (ci + 0.5) * hx0, box.beta1 + (ck + 0.5) * hy0};
    };
    auto fine_center = [&](int ci, int ck, int a, int b) -> PlanePoint {
        return {box.alpha1 + ci * hx0 + (a + 0.5) * hx0 / refine,
                box.beta1 + ck * hy0 + (b + 0.5) * hy0 / refine};
    };

    // Stage 1: coarse midpoint scan.
    std::vector<double> coarse(static_cast<std::size_t>(cells) * cells, kNegInf);
    double coarse_max = kNegInf;
    for (int ci = 0; ci < cells; ++ci)
        for (int ck = 0; ck < cells; ++ck) {
            const PlanePoint c = coarse_center(ci, ck);
            if (array.excluded(c)) continue;
            const double v = log_weight(c);
            coarse[static_cast<std::size_t>(ci) * cells + ck] = v;
            coarse_max = std::max(coarse_max, v);
        }
    if (coarse_max == kNegInf)
        throw DegenerateMass("bayes_estimate: every grid cell lies in an exclusion ball");

    CellBox sel{cells - 1, 0, cells - 1, 0};
    if (policy.single_stage) {
        sel = {0, cells - 1, 0, cells - 1};
    } else {
        for (int ci = 0; ci < cells; ++ci)
            for (int ck = 0; ck < cells; ++ck)
                if (coarse[static_cast<std::size_t>(ci) * cells + ck] >=
                    coarse_max - policy.log_window) {
                    sel.ci_lo = std::min(sel.ci_lo, ci);
                    sel.ci_hi = std::max(sel.ci_hi, ci);
                    sel.ck_lo = std::min(sel.ck_lo, ck);
                    sel.ck_hi = std::max(sel.ck_hi, ck);
                }
    }

    const double log_area_coarse = std::log(hx0 * hy0);
    const double log_area_fine = std::log(hx0 * hy0 / (static_cast<double>(refine) * refine));

    EstimateDiagnostics diag;
    diag.refine_factor = refine;

    RunningPosterior total;
    double boundary_fraction = 0.0, stage2_fraction = 0.0;
    for (int round = 0;; ++round) {
        total = RunningPosterior{};
        RunningPosterior stage2, ring;

        // Coarse cells outside the refinement box keep their midpoint value.
        for (int ci = 0; ci < cells; ++ci)
            for (int ck = 0; ck < cells; ++ck) {
                if (ci >= sel.ci_lo && ci <= sel.ci_hi && ck >= sel.ck_lo && ck <= sel.ck_hi)
                    continue;
                const double v = coarse[static_cast<std::size_t>(ci) * cells + ck];
                if (v == kNegInf) continue;
                const PlanePoint c = coarse_center(ci, ck);
                total.add(v + log_area_coarse, c.x, c.y);
            }

        // Fine lattice inside the box. The ring tracks the outermost fine
        // cells on sides that can still grow.
        const int fi_lo = sel.ci_lo * refine, fi_hi = (sel.ci_hi + 1) * refine - 1;
        const int fk_lo = sel.ck_lo * refine, fk_hi = (sel.ck_hi + 1) * refine - 1;
        for (int ci = sel.ci_lo; ci <= sel.ci_hi; ++ci)
            for (int ck = sel.ck_lo; ck <= sel.ck_hi; ++ck)
                for (int a = 0; a < refine; ++a)
                    for (int b = 0; b < refine; ++b) {
                        const PlanePoint c = fine_center(ci, ck, a, b);
                        if (array.excluded(c)) continue;
                        const double e = log_weight(c) + log_area_fine;
                        total.add(e, c.x, c.y);
                        stage2.add(e, c.x, c.y);
                        const int fi = ci * refine + a, fk = ck * refine + b;
                        const bool on_ring = (fi == fi_lo && sel.ci_lo > 0) ||
                                             (fi == fi_hi && sel.ci_hi < cells - 1) ||
                                             (fk == fk_lo && sel.ck_lo > 0) ||
                                             (fk == fk_hi && sel.ck_hi < cells - 1);
                        if (on_ring) ring.add(e, c.x, c.y);
                    }

        if (total.s <= 0.0)
            throw DegenerateMass("bayes_estimate: posterior mass vanished on the grid");
        const double log_total = total.log_total();
        boundary_fraction =
            ring.s > 0.0 ? std::exp(ring.log_total() - log_total) : 0.0;
        stage2_fraction =
            stage2.s > 0.0 ? std::exp(stage2.log_total() - log_total) : 0.0;
        diag.expansion_rounds = round;
        if (policy.single_stage || sel.covers(cells) ||
            boundary_fraction <= policy.boundary_tolerance || round >= policy.max_expansions)
            break;
        sel.ci_lo = std::max(0, sel.ci_lo - 1);
        sel.ci_hi = std::min(cells - 1, sel.ci_hi + 1);
        sel.ck_lo = std::max(0, sel.ck_lo - 1);
        sel.ck_hi = std::min(cells - 1, sel.ck_hi + 1);
    }

    diag.log_mass = total.log_total();
    diag.boundary_mass_fraction = boundary_fraction;
    diag.stage2_mass_fraction = stage2_fraction;
    return {{total.sx / total.s, total.sy / total.s}, EstimatorKind::BE, diag};
}

EstimateResult bayes_estimate(const SignalModel& model, const SensorArray& array,
                              std::span<const EventRecord> records, const Prior& prior,
                              const BayesGridPolicy& policy) {
    const LogLikelihoodField field(model, array, records);
    const auto& box = array.theta_box;
    auto log_weight = [&](PlanePoint theta) {
        return field.right_at(theta) + prior.log_at(theta, box);
    };
    return bayes_from_log_weight(array, model.scale_n, model.jump_value(), log_weight, policy);
}

namespace {

// Distance range from a point to an axis-aligned rectangle.
std::pair<double, double> rect_distance_range(PlanePoint p, const ParameterRectangle& box) {
    const double dx = std::max({box.alpha1 - p.x, 0.0, p.x - box.alpha2});
    const double dy = std::max({box.beta1 - p.y, 0.0, p.y - box.beta2});
    double far = 0.0;
    for (double cx : {box.alpha1, box.alpha2})
        for (double cy : {box.beta1, box.beta2})
            far = std::max(far, distance(p, {cx, cy}));
    return {std::hypot(dx, dy), far};
}

struct MleCandidate {
    PlanePoint point;
    double value;
};

}  // namespace

EstimateResult mle_estimate(const SignalModel& model, const SensorArray& array,
                            std::span<const EventRecord> records,
                            const MleSearchPolicy& policy) {
    const LogLikelihoodField field(model, array, records);
    const auto& box = array.theta_box;
    // Snap tolerance for counting events that sit exactly on a delay circle
    // reconstructed in floating point.
    const double snap = 1e-9 * std::max(1.0, box.diameter() / array.nu);

    double best_value = kNegInf;
    PlanePoint best{box.centroid()};
    bool best_on_jump = false;

    std::vector<MleCandidate> pool;

    // (a) coarse midpoint grid.
    const int cells = policy.coarse_cells;
    const double hx0 = box.width() / cells;
    const double hy0 = box.height() / cells;
    for (int ci = 0; ci < cells; ++ci)
        for (int ck = 0; ck < cells; ++ck) {
            const PlanePoint c{box.alpha1 + (ci + 0.5) * hx0, box.beta1 + (ck + 0.5) * hy0};
            if (array.excluded(c)) continue;
            const SidedValue v = field.at_snapped(c, snap);
            pool.push_back({c, std::max(v.left, v.right)});
        }

    // (b) pairwise intersections of event circles within the delay window.
    std::vector<std::pair<std::size_t, std::vector<double>>> windows;
    for (const auto& rec : records) {
        auto [dmin, dmax] = rect_distance_range(array.sensors[rec.sensor], box);
        const double t_lo = dmin / array.nu - 1e-12, t_hi = dmax / array.nu + 1e-12;
        std::vector<double> ts;
        for (double t : rec.times)
            if (t >= t_lo && t <= t_hi) ts.push_back(t);
        windows.emplace_back(rec.sensor, std::move(ts));
    }
    for (std::size_t p = 0; p < windows.size(); ++p)
        for (std::size_t q = p + 1; q < windows.size(); ++q) {
            const PlanePoint cj = array.sensors[windows[p].first];
            const PlanePoint ck = array.sensors[windows[q].first];
            const double d = distance(cj, ck);
            const PlanePoint axis = (1.0 / d) * (ck - cj);
            const PlanePoint perp{-axis.y, axis.x};
            for (double ta : windows[p].second) {
                const double ra = array.nu * ta;
                for (double tb : windows[q].second) {
                    const double rb = array.nu * tb;
                    if (d > ra + rb || d < std::abs(ra - rb)) continue;
                    const double a = (ra * ra - rb * rb + d * d) / (2.0 * d);
                    const double h2 = ra * ra - a * a;
                    const double h = h2 > 0.0 ? std::sqrt(h2) : 0.0;
                    const PlanePoint base = cj + a * axis;
                    for (double sgn : {1.0, -1.0}) {
                        const PlanePoint pt = base + (sgn * h) * perp;
                        if (!box.contains(pt) || array.excluded(pt)) continue;
                        const SidedValue v = field.at_snapped(pt, snap);
                        pool.push_back({pt, std::max(v.left, v.right)});
                        if (h == 0.0) break;
                    }
                }
            }
        }

    for (const auto& cand : pool)
        if (best_value == kNegInf || improves(cand.value, cand.point, best_value, best)) {
            best_value = cand.value;
            best = cand.point;
        }
    {
        const SidedValue v = field.at_snapped(best, snap);
        best_on_jump = v.right > v.left;
    }

    // (c) pattern search from the best candidates.
    std::stable_sort(pool.begin(), pool.end(),
                     [](const MleCandidate& a, const MleCandidate& b) { return a.value > b.value; });
    std::vector<PlanePoint> starts;
    for (const auto& cand : pool) {
        bool dup = false;
        for (const auto& s : starts)
            if (distance(s, cand.point) < 1e-9) dup = true;
        if (!dup) starts.push_back(cand.point);
        if (starts.size() >= static_cast<std::size_t>(policy.refine_starts)) break;
    }
    const double min_step = policy.step_fraction * box.diameter();
    for (const auto& start : starts) {
        PlanePoint cur = start;
        SidedValue vc = field.at_snapped(cur, snap);
        double cur_val = std::max(vc.left, vc.right);
        double step = std::max(hx0, hy0) * 0.5;
        while (step > min_step) {
            bool moved = false;
            const PlanePoint moves[4] = {{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}};
            for (const auto& mv : moves) {
                const PlanePoint p = box.clamp(cur + mv);
                if (array.excluded(p)) continue;
                const SidedValue v = field.at_snapped(p, snap);
                const double m = std::max(v.left, v.right);
                if (m > cur_val + 1e-12) {
                    cur = p;
                    cur_val = m;
                    moved = true;
                    break;
                }
            }
            if (!moved) step *= 0.5;
        }
        if (improves(cur_val, cur, best_value, best)) {
            best_value = cur_val;
            best = cur;
            const SidedValue v = field.at_snapped(cur, snap);
            best_on_jump = v.right > v.left;
        }
    }

    EstimateDiagnostics diag;
    diag.right_limit_attained = best_on_jump;
    return {best, EstimatorKind::MLE, diag};
}

double estimate_arrival(const SignalModel& model, const EventRecord& record) {
    if (!model.is_constant()) throw FormError("estimate_arrival: constant form required");
    const double ell = model.log_jump();
    const double n_lambda1 = model.scale_n * std::get<ConstantForm>(model.form).lambda1;
    const double T = record.horizon;
    const auto& ts = record.times;
    const double N = static_cast<double>(ts.size());
    // Candidates: left limits at event times (value of the closed-side sum)
    // and tau = T with value 0; ties resolve to the smallest tau.
    double best_tau = T;
    double best_val = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double tau = ts[k];
        if (!(tau > 0.0 && tau < T)) continue;
        const double val = ell * (N - static_cast<double>(k)) + n_lambda1 * (tau - T);
        if (val > best_val || (val == best_val && tau < best_tau)) {
            best_val = val;
            best_tau = tau;
        }
    }
    return best_tau;
}

EstimateResult trilaterate(const SensorArray& array, std::span<const double> tau_hats) {
    if (tau_hats.size() != array.size() || array.size() < 3)
        throw DomainError("trilaterate: need one arrival time per sensor (>= 3)");
    const PlanePoint ref = array.sensors[0];
    const double r0 = array.nu * tau_hats[0];
    // Rows 2 <theta_j - theta_1, theta> = ||theta_j||^2 - ||theta_1||^2
    //                                     - nu^2 (tau_j^2 - tau_1^2).
    double m00 = 0.0, m01 = 0.0, m11 = 0.0, v0 = 0.0, v1 = 0.0;
    for (std::size_t j = 1; j < array.size(); ++j) {
        const PlanePoint sj = array.sensors[j];
        const double rj = array.nu * tau_hats[j];
        const double ax = 2.0 * (sj.x - ref.x), ay = 2.0 * (sj.y - ref.y);
        const double b = (dot(sj, sj) - dot(ref, ref)) - (rj * rj - r0 * r0);
        m00 += ax * ax;
        m01 += ax * ay;
        m11 += ay * ay;
        v0 += ax * b;
        v1 += ay * b;
    }
    // Condition number of the row matrix from the normal-equation spectrum.
    const double tr = m00 + m11;
    const double det = m00 * m11 - m01 * m01;
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    const double eig_hi = 0.5 * (tr + disc);
    const double eig_lo = 0.5 * (tr - disc);
    const double cond = eig_lo > 0.0 ? std::sqrt(eig_hi / eig_lo)
                                     : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12))
        throw SingularGeometry("trilaterate: sensors numerically aligned (condition number " +
                               std::to_string(cond) + ")");
    EstimateDiagnostics diag;
    diag.condition_number = cond;
    const PlanePoint estimate{(m11 * v0 - m01 * v1) / det, (m00 * v1 - m01 * v0) / det};
    return {estimate, EstimatorKind::TRILAT, diag};
}

}  // namespace poissonloc
