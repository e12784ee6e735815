#include "gsub/marginals.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gsub/error.hpp"
#include "gsub/normal.hpp"
#include "gsub/quadrature.hpp"

namespace gsub {
namespace {

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void check_probability(double y, const char* what) {
    if (!(y > 0.0 && y < 1.0)) throw DomainError(std::string(what) + ": probability must lie in (0,1)");
}

std::vector<double> parse_params(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view tok = text.substr(start, end - start);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
            throw InputError("cannot parse parameter '" + std::string(tok) + "'");
        }
        out.push_back(v);
        start = end + 1;
    }
    return out;
}

}  // namespace

MarginalDistribution MarginalDistribution::normal(double mean, double sd) {
    if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) throw DomainError("normal: need finite mean and sd > 0");
    MarginalDistribution d;
    d.kind_ = Kind::normal;
    d.p0_ = mean;
    d.p1_ = sd;
    d.mean_ = mean;
    d.variance_ = sd * sd;
    d.fourth_ = 3.0 * d.variance_ * d.variance_;
    return d;
}

MarginalDistribution MarginalDistribution::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential: need rate > 0");
    MarginalDistribution d;
    d.kind_ = Kind::exponential;
    d.p0_ = rate;
    d.mean_ = 1.0 / rate;
    d.variance_ = 1.0 / (rate * rate);
    d.fourth_ = 9.0 * d.variance_ * d.variance_;
    return d;
}

MarginalDistribution MarginalDistribution::uniform(double lo, double hi) {
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("uniform: need lo < hi");
    MarginalDistribution d;
    d.kind_ = Kind::uniform;
    d.p0_ = lo;
    d.p1_ = hi;
    const double w = hi - lo;
    d.mean_ = 0.5 * (lo + hi);
    d.variance_ = w * w / 12.0;
    d.fourth_ = w * w * w * w / 80.0;
    return d;
}

MarginalDistribution MarginalDistribution::chisq1() {
    MarginalDistribution d;
    d.kind_ = Kind::chisq1;
    d.mean_ = 1.0;
    d.variance_ = 2.0;
    d.fourth_ = 60.0;
    return d;
}

MarginalDistribution MarginalDistribution::student_t(double df) {
    if (!(df > 2.0) || !std::isfinite(df)) throw DomainError("student_t: need df > 2 for a finite variance");
    MarginalDistribution d;
    d.kind_ = Kind::student_t;
    d.p0_ = df;
    d.mean_ = 0.0;
    d.variance_ = df / (df - 2.0);
    if (df > 4.0) d.fourth_ = 3.0 * df * df / ((df - 2.0) * (df - 4.0));
    return d;
}

MarginalDistribution MarginalDistribution::empirical(std::span<const double> data, std::size_t min_n) {
    if (data.size() < min_n) {
        throw InputError("empirical marginal: need at least " + std::to_string(min_n) + " points, got " +
                         std::to_string(data.size()));
    }
    if (data.empty()) throw InputError("empirical marginal: empty sample");
    auto sorted = std::make_shared<std::vector<double>>(data.begin(), data.end());
    for (double v : *sorted) {
        if (!std::isfinite(v)) throw InputError("empirical marginal: non-finite value in sample");
    }
    std::sort(sorted->begin(), sorted->end());

    const double n = static_cast<double>(sorted->size());
    double mean = 0.0;
    for (double v : *sorted) mean += v;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : *sorted) {
        const double d2 = (v - mean) * (v - mean);
        m2 += d2;
        m4 += d2 * d2;
    }

    MarginalDistribution d;
    d.kind_ = Kind::empirical;
    d.mean_ = mean;
    d.variance_ = m2 / n;
    d.fourth_ = m4 / n;
    d.sample_ = std::move(sorted);
    return d;
}

MarginalDistribution MarginalDistribution::parse(std::string_view spec) {
    std::string_view name = spec;
    std::vector<double> params;
    if (const auto open = spec.find('('); open != std::string_view::npos) {
        if (spec.back() != ')') throw InputError("malformed marginal spec '" + std::string(spec) + "'");
        name = spec.substr(0, open);
        params = parse_params(spec.substr(open + 1, spec.size() - open - 2));
    }
    auto want = [&](std::size_t lo, std::size_t hi) {
        if (params.size() < lo || params.size() > hi) {
            throw InputError("wrong number of parameters for marginal '" + std::string(name) + "'");
        }
    };
    if (name == "normal") {
        want(0, 2);
        return normal(params.size() > 0 ? params[0] : 0.0, params.size() > 1 ? params[1] : 1.0);
    }
    if (name == "exponential") {
        want(0, 1);
        return exponential(params.empty() ? 1.0 : params[0]);
    }
    if (name == "uniform") {
        want(0, 2);
        if (params.size() == 1) throw InputError("uniform takes zero or two parameters");
        return params.empty() ? uniform() : uniform(params[0], params[1]);
    }
    if (name == "chisq1") {
        want(0, 0);
        return chisq1();
    }
    if (name == "student_t") {
        want(1, 1);
        return student_t(params[0]);
    }
    throw InputError("unknown marginal '" + std::string(spec) + "'");
}

std::string MarginalDistribution::name() const {
    switch (kind_) {
        case Kind::normal: return "normal(" + fmt_num(p0_) + "," + fmt_num(p1_) + ")";
        case Kind::exponential: return "exponential(" + fmt_num(p0_) + ")";
        case Kind::uniform: return "uniform(" + fmt_num(p0_) + "," + fmt_num(p1_) + ")";
        case Kind::chisq1: return "chisq1";
        case Kind::student_t: return "student_t(" + fmt_num(p0_) + ")";
        case Kind::empirical: return "empirical(n=" + std::to_string(sample_->size()) + ")";
    }
    return "unknown";
}

std::span<const double> MarginalDistribution::sorted_sample() const noexcept {
    if (!sample_) return {};
    return *sample_;
}

double MarginalDistribution::cdf(double x) const {
    switch (kind_) {
        case Kind::normal: return normal::cdf((x - p0_) / p1_);
        case Kind::exponential: return x <= 0.0 ? 0.0 : -std::expm1(-p0_ * x);
        case Kind::uniform: return x <= p0_ ? 0.0 : (x >= p1_ ? 1.0 : (x - p0_) / (p1_ - p0_));
        case Kind::chisq1: return x <= 0.0 ? 0.0 : std::erf(std::sqrt(0.5 * x));
        case Kind::student_t: return boost::math::cdf(boost::math::students_t_distribution<double>(p0_), x);
        case Kind::empirical: {
            const auto& s = *sample_;
            const auto count = std::upper_bound(s.begin(), s.end(), x) - s.begin();
            return static_cast<double>(count) / static_cast<double>(s.size());
        }
    }
    return 0.0;
}

double MarginalDistribution::sf(double x) const {
    switch (kind_) {
        case Kind::normal: return normal::sf((x - p0_) / p1_);
        case Kind::exponential: return x <= 0.0 ? 1.0 : std::exp(-p0_ * x);
        case Kind::uniform: return x <= p0_ ? 1.0 : (x >= p1_ ? 0.0 : (p1_ - x) / (p1_ - p0_));
        case Kind::chisq1: return x <= 0.0 ? 1.0 : std::erfc(std::sqrt(0.5 * x));
        case Kind::student_t:
            return boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(p0_), x));
        case Kind::empirical: return 1.0 - cdf(x);
    }
    return 0.0;
}

double MarginalDistribution::t_quantile_lower(double y) const {
    // Boost's inverse-beta quantile, then one Newton step kept only if it
    // shrinks the CDF residual. Valid for y <= 1/2.
    const boost::math::students_t_distribution<double> dist(p0_);
    if (y == 0.5) return 0.0;
    double x = boost::math::quantile(dist, y);
    const double fx = boost::math::cdf(dist, x) - y;
    const double dens = boost::math::pdf(dist, x);
    if (fx != 0.0 && dens > 0.0) {
        const double next = x - fx / dens;
        if (std::isfinite(next) && std::fabs(boost::math::cdf(dist, next) - y) < std::fabs(fx)) x = next;
    }
    return x;
}

double MarginalDistribution::quantile(double y) const {
    check_probability(y, "quantile");
    switch (kind_) {
        case Kind::normal: return p0_ + p1_ * normal::quantile(y);
        case Kind::exponential: return -std::log1p(-y) / p0_;
        case Kind::uniform: return p0_ + y * (p1_ - p0_);
        case Kind::chisq1: {
            const double r = boost::math::erf_inv(y);
            return 2.0 * r * r;
        }
        case Kind::student_t: return y <= 0.5 ? t_quantile_lower(y) : -t_quantile_lower(1.0 - y);
        case Kind::empirical: {
            // smallest i (1-based) with i/n >= y
            const auto& s = *sample_;
            const double n = static_cast<double>(s.size());
            auto i = static_cast<std::size_t>(std::ceil(n * y));
            i = std::clamp<std::size_t>(i, 1, s.size());
            while (i > 1 && static_cast<double>(i - 1) / n >= y) --i;
            while (i < s.size() && static_cast<double>(i) / n < y) ++i;
            return s[i - 1];
        }
    }
    return 0.0;
}

double MarginalDistribution::upper_quantile(double q) const {
    check_probability(q, "upper_quantile");
    switch (kind_) {
        case Kind::normal: return p0_ - p1_ * normal::quantile(q);
        case Kind::exponential: return -std::log(q) / p0_;
        case Kind::uniform: return p1_ - q * (p1_ - p0_);
        case Kind::chisq1: {
            const double r = normal::quantile(0.5 * q);
            return r * r;
        }
        case Kind::student_t: return q <= 0.5 ? -t_quantile_lower(q) : t_quantile_lower(1.0 - q);
        case Kind::empirical: return quantile(1.0 - q);
    }
    return 0.0;
}

Transport::Transport(MarginalDistribution marginal, bool centered)
    : marginal_(std::move(marginal)), centered_(centered) {}

double Transport::uncentered(double x) const {
    constexpr double kTiny = std::numeric_limits<double>::min();
    if (x <= 0.0) return marginal_.quantile(std::max(normal::cdf(x), kTiny));
    return marginal_.upper_quantile(std::max(normal::cdf(-x), kTiny));
}

Transport build_transport(const MarginalDistribution& d, bool centered) {
    if (!std::isfinite(d.variance())) throw DomainError("build_transport: marginal needs a finite variance");
    return Transport(d, centered);
}

double verify_rank_one(const Transport& t, std::size_t quad_nodes) {
    const MarginalDistribution& d = t.marginal();
    double value = 0.0;
    if (d.is_empirical()) {
        // f is a step function with jumps at c_j = Phi^{-1}(j/n); since
        // x phi(x) = -phi'(x), E[f(X) X] = sum_j phi(c_j) (z_{j+1} - z_j).
        const auto s = d.sorted_sample();
        const double n = static_cast<double>(s.size());
        for (std::size_t j = 1; j < s.size(); ++j) {
            const double jump = s[j] - s[j - 1];
            if (jump == 0.0) continue;
            value += normal::pdf(normal::quantile(static_cast<double>(j) / n)) * jump;
        }
    } else {
        const GaussRule& rule = gauss_hermite_rule(quad_nodes);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            value += rule.weights[i] * t.uncentered(rule.nodes[i]) * rule.nodes[i];
        }
    }
    const double scale = std::fabs(d.mean()) + std::sqrt(d.variance());
    if (!(value > 1e-10 * scale) || scale == 0.0) {
        throw DegenerateError("degenerate or numerically unresolved rank: E[f(X)X] = " + fmt_num(value));
    }
    return value;
}

std::vector<double> read_column_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view v = line;
        if (const auto comma = v.find(','); comma != std::string_view::npos) v = v.substr(0, comma);
        while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
        while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
        if (v.empty() || v.front() == '#') continue;
        double x = 0.0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            if (out.empty() && lineno == 1) continue;  // header
            throw InputError(path + ":" + std::to_string(lineno) + ": not a number");
        }
        out.push_back(x);
    }
    return out;
}

double ks_distance(std::span<const double> sample, const MarginalDistribution& d) {
    if (sample.empty()) throw InputError("ks_distance: empty sample");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double dist = 0.0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = i;
        while (j < s.size() && s[j] == s[i]) ++j;  // ties collapse into one jump
        const double f = d.cdf(s[i]);
        double f_left = f;  // P(z < s_i)
        if (d.is_empirical()) {
            const auto ss = d.sorted_sample();
            f_left = static_cast<double>(std::lower_bound(ss.begin(), ss.end(), s[i]) - ss.begin()) /
                     static_cast<double>(ss.size());
        }
        dist = std::max({dist, std::fabs(static_cast<double>(j) / n - f),
                         std::fabs(f_left - static_cast<double>(i) / n)});
        i = j;
    }
    return dist;
}

}  // namespace gsub
