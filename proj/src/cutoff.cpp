#include "sce/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sce {

namespace {

// RFC 4180 quoting, applied only when the field needs it.
std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        quoted += c;
        if (c == '"') quoted += '"';
    }
    quoted += '"';
    return quoted;
}

}  // namespace

void FeatureRanking::validate() const {
    const std::size_t d = order.size();
    if (d == 0) throw std::invalid_argument("ranking: empty order");
    if (sorted_abs.size() != d) throw std::invalid_argument("ranking: size mismatch");
    for (std::size_t i = 1; i < d; ++i) {
        if (sorted_abs[i] > sorted_abs[i - 1]) {
            throw std::invalid_argument("ranking: sorted_abs not non-increasing");
        }
    }
    if (elbow_index) {
        if (*elbow_index < 0 || static_cast<std::size_t>(*elbow_index) >= d) {
            throw std::invalid_argument("ranking: elbow index out of range");
        }
    }
    if (selected.size() > d) throw std::invalid_argument("ranking: too many selected");
}

void rank_features(const Eigen::VectorXd& spl, std::vector<int>& order,
                   std::vector<double>& sorted_abs) {
    if (spl.size() == 0) throw std::invalid_argument("ranking: empty weight vector");
    order.resize(static_cast<std::size_t>(spl.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&spl](int a, int b) {
        const double ma = std::abs(spl[a]);
        const double mb = std::abs(spl[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    sorted_abs.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted_abs[i] = std::abs(spl[order[i]]);
}

int elbow_index(const std::vector<double>& sorted_abs) {
    const std::size_t d = sorted_abs.size();
    if (d < 3) throw std::invalid_argument("elbow: need at least 3 points");
    const double dx = static_cast<double>(d - 1);
    const double dy = sorted_abs.back() - sorted_abs.front();
    const double chord = std::hypot(dx, dy);
    int best = 0;
    double best_dist = 0.0;  // the first point lies on the chord
    for (std::size_t i = 1; i < d; ++i) {
        const double cross =
            dx * (sorted_abs.front() - sorted_abs[i]) + static_cast<double>(i) * dy;
        const double dist = std::abs(cross) / chord;
        if (dist > best_dist) {
            best_dist = dist;
            best = static_cast<int>(i);
        }
    }
    return best;
}

FeatureRanking select_features(const Eigen::VectorXd& spl) {
    FeatureRanking ranking;
    rank_features(spl, ranking.order, ranking.sorted_abs);
    if (spl.size() < 3) {
        ranking.selected = ranking.order;  // no elbow on a 1- or 2-point curve
        return ranking;
    }
    ranking.elbow_index = elbow_index(ranking.sorted_abs);
    const double cut = ranking.sorted_abs[static_cast<std::size_t>(*ranking.elbow_index)];
    for (std::size_t i = 0; i < ranking.order.size(); ++i) {
        if (ranking.sorted_abs[i] > cut) ranking.selected.push_back(ranking.order[i]);
    }
    return ranking;
}

std::vector<int> top_k(const std::vector<int>& order, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > order.size()) {
        throw std::invalid_argument("top_k: k out of range");
    }
    return std::vector<int>(order.begin(), order.begin() + k);
}

std::string ranking_csv(const FeatureRanking& ranking,
                        const std::vector<std::string>& feature_names) {
    ranking.validate();
    if (!feature_names.empty() && feature_names.size() != ranking.order.size()) {
        throw std::invalid_argument("ranking csv: feature name count mismatch");
    }
    std::ostringstream out;
    out << "rank,feature_index,feature_name,abs_weight,selected_flag\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < ranking.order.size(); ++i) {
        const int feature = ranking.order[i];
        const std::string name = feature_names.empty()
                                     ? "f" + std::to_string(feature)
                                     : feature_names[static_cast<std::size_t>(feature)];
        // selected features form a prefix of the ranked order
        const int flag = i < ranking.selected.size() ? 1 : 0;
        out << (i + 1) << ',' << feature << ',' << csv_field(name) << ',' << ranking.sorted_abs[i]
            << ',' << flag << '\n';
    }
    return out.str();
}

}  // namespace sce
