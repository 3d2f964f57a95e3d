#include "vranfair/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace vranfair {

namespace {

bool all_finite(const Vec& v) {
    for (double c : v)
        if (!std::isfinite(c)) return false;
    return true;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

const SnrCoeffs& ServerProfile::at_snr(double snr_db) const {
    if (snr_grid.empty()) throw std::invalid_argument("server profile '" + id + "' has no SNR points");
    size_t best = 0;
    double best_dist = std::fabs(snr_db - snr_grid[0]);
    for (size_t g = 1; g < snr_grid.size(); ++g) {
        const double dist = std::fabs(snr_db - snr_grid[g]);
        if (dist < best_dist) {
            best = g;
            best_dist = dist;
        }
    }
    return coeffs[best];
}

void ServerProfile::validate() const {
    require(!snr_grid.empty(), "server profile '" + id + "' has no SNR points");
    require(snr_grid.size() == coeffs.size(), "server profile '" + id + "' grid/coeff size mismatch");
    for (size_t g = 0; g < snr_grid.size(); ++g) {
        require(std::isfinite(snr_grid[g]), "server profile '" + id + "' has a non-finite SNR");
        if (g > 0)
            require(snr_grid[g] > snr_grid[g - 1], "server profile '" + id + "' SNR grid not ascending");
        const SnrCoeffs& c = coeffs[g];
        require(std::isfinite(c.zeta) && std::isfinite(c.o) && std::isfinite(c.delta) && std::isfinite(c.gamma),
                "server profile '" + id + "' has non-finite coefficients");
    }
}

void AssignmentEnv::validate() const {
    const size_t vbs = lambda.size();
    require(vbs > 0, "assignment env has no vBS");
    require(n.size() == vbs && snr.size() == vbs, "assignment env per-vBS vectors disagree in length");
    const size_t servers = capacity.size();
    require(servers > 0, "assignment env has no servers");
    require(prices.size() == servers && profiles.size() == servers,
            "assignment env per-server vectors disagree in length");
    require(all_finite(lambda) && all_finite(n) && all_finite(snr) && all_finite(prices) && all_finite(capacity),
            "assignment env has non-finite entries");
    for (double v : lambda) require(v >= 0.0, "demand must be nonnegative");
    for (double v : n) require(v > 0.0, "block size must be positive");
    for (double v : prices) require(v > 0.0, "price must be positive");
    for (size_t j = 0; j < servers; ++j)
        require(capacity[j] > 0.0, "capacity must be positive (server " + std::to_string(j) +
                                       "); give an unusable server a small epsilon instead");
    require(std::isfinite(phi_h) && phi_h > 0.0, "phi_h must be positive");
    for (const ServerProfile& p : profiles) p.validate();
}

Mat load_coefficients(const AssignmentEnv& env) {
    const int vbs = env.num_vbs(), servers = env.num_servers();
    Mat a(vbs, servers);
    for (int i = 0; i < vbs; ++i) {
        const double blocks = 8.0 * env.lambda[i] / env.n[i]; // bytes -> bits
        for (int j = 0; j < servers; ++j) {
            const SnrCoeffs& c = env.profiles[j].at_snr(env.snr[i]);
            a(i, j) = blocks * (c.zeta * env.n[i] + c.o);
        }
    }
    return a;
}

Mat saving_coefficients(const AssignmentEnv& env) {
    const int vbs = env.num_vbs(), servers = env.num_servers();
    Mat s(vbs, servers);
    for (int i = 0; i < vbs; ++i) {
        const double blocks = 8.0 * env.lambda[i] / env.n[i]; // bytes -> bits
        for (int j = 0; j < servers; ++j) {
            const SnrCoeffs& c = env.profiles[j].at_snr(env.snr[i]);
            s(i, j) = env.phi_h * env.prices[j] * blocks * (c.delta * env.n[i] + c.gamma);
        }
    }
    return s;
}

AssignmentUtility assignment_utility(const Mat& x, const AssignmentEnv& env, double u_floor) {
    env.validate();
    const int vbs = env.num_vbs(), servers = env.num_servers();
    require(x.rows == vbs && x.cols == servers, "assignment matrix shape disagrees with the env");
    require(std::isfinite(u_floor), "u_floor must be finite");

    const Mat a = load_coefficients(env);
    Vec busy(servers, 0.0), factor(servers, 1.0);
    std::vector<bool> over(servers, false);
    for (int j = 0; j < servers; ++j) {
        for (int k = 0; k < vbs; ++k) busy[j] += x(k, j) * a(k, j);
        if (busy[j] > env.capacity[j]) { // at the branch point the idle branch rules
            over[j] = true;
            factor[j] = 2.0 - busy[j] / env.capacity[j];
        }
    }

    AssignmentUtility out;
    out.u.assign(vbs, 0.0);
    out.du.assign(vbs, Mat(vbs, servers));
    for (int i = 0; i < vbs; ++i) {
        Mat& grad = out.du[i];
        for (int j = 0; j < servers; ++j) {
            out.u[i] += x(i, j) * env.lambda[i] * factor[j];
            grad(i, j) += env.lambda[i] * factor[j];
            if (over[j]) {
                const double pull = x(i, j) * env.lambda[i] / env.capacity[j];
                for (int k = 0; k < vbs; ++k) grad(k, j) -= pull * a(k, j);
            }
        }
        if (out.u[i] < u_floor) {
            out.u[i] = u_floor;
            grad = Mat(vbs, servers);
            ++out.floored;
        }
    }
    return out;
}

EnergySaving energy_saving(const Mat& x, const AssignmentEnv& env, double h_floor) {
    env.validate();
    const int vbs = env.num_vbs(), servers = env.num_servers();
    require(x.rows == vbs && x.cols == servers, "assignment matrix shape disagrees with the env");
    require(std::isfinite(h_floor), "h_floor must be finite");

    const Mat save = saving_coefficients(env);
    EnergySaving out;
    out.h.assign(servers, 0.0);
    out.dh = Mat(vbs, servers);
    for (int j = 0; j < servers; ++j) {
        for (int i = 0; i < vbs; ++i) {
            out.h[j] += (1.0 - x(i, j)) * save(i, j);
            out.dh(i, j) = -save(i, j);
        }
        if (out.h[j] < h_floor) {
            out.h[j] = h_floor;
            for (int i = 0; i < vbs; ++i) out.dh(i, j) = 0.0;
            ++out.floored;
        }
    }
    return out;
}

EmptyKernel buffer_empty_fraction(double y, double rho) {
    require(std::isfinite(rho) && rho > 0.0, "rho must be positive");
    if (!std::isfinite(y) || y < 0.0) throw std::domain_error("flush threshold must be nonnegative");
    const double z = y / rho;
    EmptyKernel k;
    if (z < 1e-4) { // series keeps the removable singularity smooth
        k.u = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
        k.du = (-0.5 + z / 3.0 - z * z / 8.0) / rho;
    } else {
        const double em1 = std::expm1(-z);
        k.u = -em1 / z;
        k.du = (z * std::exp(-z) + em1) / (z * z) / rho;
    }
    return k;
}

void BetaTable::validate() const {
    require(!snr_knots.empty(), "beta table has no knots");
    require(snr_knots.size() == values.size(), "beta table knot/value size mismatch");
    for (size_t g = 0; g < snr_knots.size(); ++g) {
        require(std::isfinite(snr_knots[g]) && std::isfinite(values[g]), "beta table has non-finite entries");
        if (g > 0) require(snr_knots[g] > snr_knots[g - 1], "beta table knots not ascending");
    }
}

double BetaTable::at(double snr_db) const {
    validate();
    if (!(snr_db >= snr_knots.front() && snr_db <= snr_knots.back()))
        throw std::domain_error("SNR " + std::to_string(snr_db) + " dB outside the beta table range [" +
                                std::to_string(snr_knots.front()) + ", " + std::to_string(snr_knots.back()) + "]");
    const auto hi = std::upper_bound(snr_knots.begin(), snr_knots.end(), snr_db);
    if (hi == snr_knots.end()) return values.back();
    if (hi == snr_knots.begin()) return values.front();
    const size_t r = static_cast<size_t>(hi - snr_knots.begin());
    const double w = (snr_db - snr_knots[r - 1]) / (snr_knots[r] - snr_knots[r - 1]);
    return values[r - 1] + w * (values[r] - values[r - 1]);
}

void MinTbEnv::validate() const {
    const size_t users = b.size();
    require(users > 0, "batching env has no users");
    require(rho.size() == users && snr.size() == users, "batching env per-user vectors disagree in length");
    require(all_finite(b) && all_finite(rho) && all_finite(snr), "batching env has non-finite entries");
    for (double v : b) require(v > 0.0, "event rate must be positive");
    for (double v : rho) require(v > 0.0, "bits per event must be positive");
    require(std::isfinite(phi) && phi >= 0.0, "phi must be nonnegative");
    beta.validate();
}

MinTbUtility mintb_utility(const Vec& y, const MinTbEnv& env) {
    env.validate();
    const int users = env.num_users();
    require(static_cast<int>(y.size()) == users, "threshold vector length disagrees with the env");
    MinTbUtility out;
    out.u.assign(users, 0.0);
    out.du.assign(users, 0.0);
    for (int i = 0; i < users; ++i) {
        const EmptyKernel k = buffer_empty_fraction(y[i], env.rho[i]);
        out.u[i] = k.u;
        out.du[i] = k.du;
    }
    return out;
}

MinTbCost mintb_cost(const Vec& y, const MinTbEnv& env) {
    const MinTbUtility base = mintb_utility(y, env);
    const int users = env.num_users();
    MinTbCost out;
    out.dc.assign(users, 0.0);
    for (int i = 0; i < users; ++i) {
        const double rate = env.phi * env.beta.at(env.snr[i]) * env.b[i];
        out.c += rate * base.u[i];
        out.dc[i] = rate * base.du[i];
    }
    return out;
}

namespace {

constexpr const char* kMeasurementHeader = "pu_id,snr_db,tb_size_bits,proc_time_s,energy_j";

std::runtime_error line_error(size_t line, const std::string& what) {
    return std::runtime_error("measurements line " + std::to_string(line) + ": " + what);
}

double parse_field(const std::string& field, size_t line, const char* name) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &used);
    } catch (const std::exception&) {
        throw line_error(line, std::string("cannot parse ") + name + " from '" + field + "'");
    }
    if (used != field.size())
        throw line_error(line, std::string("trailing junk after ") + name + " in '" + field + "'");
    if (!std::isfinite(v)) throw line_error(line, std::string(name) + " is not finite");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

// "ha" as a standalone token start: not preceded by a letter or digit and not
// followed by a letter, so "ha", "ha2" and "pool-ha" match but "haswell" and
// "channel" do not.
bool is_accelerator_id(const std::string& id) {
    std::string low;
    for (char ch : id) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    for (size_t p = 0; p + 2 <= low.size(); ++p) {
        if (low[p] != 'h' || low[p + 1] != 'a') continue;
        const bool clean_before = p == 0 || !std::isalnum(static_cast<unsigned char>(low[p - 1]));
        const bool clean_after = p + 2 == low.size() || !std::isalpha(static_cast<unsigned char>(low[p + 2]));
        if (clean_before && clean_after) return true;
    }
    return false;
}

struct FitAccum {
    std::vector<double> sizes, times, energies;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit ols(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double count = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (size_t r = 0; r < xs.size(); ++r) {
        mx += xs[r];
        my += ys[r];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0;
    for (size_t r = 0; r < xs.size(); ++r) {
        sxx += (xs[r] - mx) * (xs[r] - mx);
        sxy += (xs[r] - mx) * (ys[r] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

} // namespace

std::vector<MeasurementRow> load_measurements(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("measurements file is empty");
    strip_cr(line);
    if (line != kMeasurementHeader)
        throw std::runtime_error(std::string("measurements header must be exactly '") + kMeasurementHeader + "'");

    std::vector<MeasurementRow> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != 5)
            throw line_error(lineno, "expected 5 fields, got " + std::to_string(fields.size()));
        MeasurementRow row;
        row.pu_id = fields[0];
        if (row.pu_id.empty()) throw line_error(lineno, "empty pu_id");
        row.snr_db = parse_field(fields[1], lineno, "snr_db");
        row.tb_size_bits = parse_field(fields[2], lineno, "tb_size_bits");
        row.proc_time_s = parse_field(fields[3], lineno, "proc_time_s");
        row.energy_j = parse_field(fields[4], lineno, "energy_j");
        if (row.tb_size_bits <= 0.0) throw line_error(lineno, "tb_size_bits must be positive");
        rows.push_back(row);
    }
    return rows;
}

std::vector<MeasurementRow> load_measurements_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open measurements file '" + path + "'");
    try {
        return load_measurements(in);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::vector<ServerProfile> fit_linear_profiles(const std::vector<MeasurementRow>& rows,
                                               std::vector<std::string>* warnings) {
    require(!rows.empty(), "no measurements to fit");
    std::map<std::string, std::map<double, FitAccum>> groups;
    for (const MeasurementRow& row : rows) {
        FitAccum& acc = groups[row.pu_id][row.snr_db];
        acc.sizes.push_back(row.tb_size_bits);
        acc.times.push_back(row.proc_time_s);
        acc.energies.push_back(row.energy_j);
    }

    std::vector<ServerProfile> profiles;
    for (const auto& [id, by_snr] : groups) {
        ServerProfile prof;
        prof.id = id;
        prof.kind = is_accelerator_id(id) ? ServerKind::kHa : ServerKind::kCpu;
        for (const auto& [snr, acc] : by_snr) {
            const std::string group = "pu '" + id + "' at " + std::to_string(snr) + " dB";
            const double distinct = [&] {
                std::vector<double> s = acc.sizes;
                std::sort(s.begin(), s.end());
                return static_cast<double>(std::unique(s.begin(), s.end()) - s.begin());
            }();
            if (distinct < 2.0)
                throw std::invalid_argument("degenerate measurement group: " + group +
                                            " needs at least two distinct block sizes");
            const LineFit time_fit = ols(acc.sizes, acc.times);
            const LineFit energy_fit = ols(acc.sizes, acc.energies);
            SnrCoeffs c;
            c.zeta = time_fit.slope;
            c.o = time_fit.intercept;
            c.delta = energy_fit.slope;
            c.gamma = energy_fit.intercept;
            if (!(std::isfinite(c.zeta) && std::isfinite(c.o) && std::isfinite(c.delta) && std::isfinite(c.gamma)))
                throw std::invalid_argument("non-finite fit for " + group);
            if (warnings && prof.kind == ServerKind::kHa) {
                double mean_size = 0.0;
                for (double s : acc.sizes) mean_size += s;
                mean_size /= static_cast<double>(acc.sizes.size());
                if (std::fabs(c.zeta) * mean_size > 0.1 * std::fabs(c.o))
                    warnings->push_back("hardware accelerator " + group +
                                        ": time slope is not negligible against the intercept");
                if (std::fabs(c.delta) * mean_size > 0.1 * std::fabs(c.gamma))
                    warnings->push_back("hardware accelerator " + group +
                                        ": energy slope is not negligible against the intercept");
            }
            prof.snr_grid.push_back(snr);
            prof.coeffs.push_back(c);
        }
        prof.validate();
        profiles.push_back(std::move(prof));
    }
    return profiles;
}

namespace {

double number_from_json(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw std::invalid_argument("profile key '" + key + "' must be a number");
    return v.get<double>();
}

} // namespace

std::string profiles_to_json(const std::vector<ServerProfile>& profiles) {
    nlohmann::json doc = nlohmann::json::array();
    for (const ServerProfile& p : profiles) {
        p.validate();
        nlohmann::json coeffs = nlohmann::json::array();
        for (const SnrCoeffs& c : p.coeffs)
            coeffs.push_back({{"zeta", c.zeta}, {"o", c.o}, {"delta", c.delta}, {"gamma", c.gamma}});
        doc.push_back({{"id", p.id},
                       {"kind", p.kind == ServerKind::kHa ? "ha" : "cpu"},
                       {"snr_grid", p.snr_grid},
                       {"coeffs", std::move(coeffs)}});
    }
    return doc.dump(2) + "\n";
}

std::vector<ServerProfile> profiles_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("profile document is not valid JSON: ") + e.what());
    }
    if (doc.is_object()) {
        // Tool output wraps the array in {"provenance": ..., "profiles": [...]}.
        for (const auto& [key, value] : doc.items()) {
            (void)value;
            if (key != "profiles" && key != "provenance")
                throw std::invalid_argument("unknown profile document key '" + key + "'");
        }
        if (!doc.contains("profiles"))
            throw std::invalid_argument("profile document object needs a 'profiles' array");
        doc = doc["profiles"];
    }
    if (!doc.is_array()) throw std::invalid_argument("profile document must be a JSON array");

    std::vector<ServerProfile> profiles;
    for (const nlohmann::json& entry : doc) {
        if (!entry.is_object()) throw std::invalid_argument("each profile must be a JSON object");
        ServerProfile p;
        bool saw_id = false, saw_kind = false, saw_grid = false, saw_coeffs = false;
        for (const auto& [key, value] : entry.items()) {
            if (key == "id") {
                if (!value.is_string()) throw std::invalid_argument("profile 'id' must be a string");
                p.id = value.get<std::string>();
                saw_id = true;
            } else if (key == "kind") {
                const std::string kind = value.is_string() ? value.get<std::string>() : "";
                if (kind == "cpu") p.kind = ServerKind::kCpu;
                else if (kind == "ha") p.kind = ServerKind::kHa;
                else throw std::invalid_argument("profile 'kind' must be \"cpu\" or \"ha\"");
                saw_kind = true;
            } else if (key == "snr_grid") {
                if (!value.is_array()) throw std::invalid_argument("profile 'snr_grid' must be an array");
                for (const nlohmann::json& e : value) p.snr_grid.push_back(number_from_json(e, key));
                saw_grid = true;
            } else if (key == "coeffs") {
                if (!value.is_array()) throw std::invalid_argument("profile 'coeffs' must be an array");
                for (const nlohmann::json& e : value) {
                    if (!e.is_object()) throw std::invalid_argument("each coeffs entry must be a JSON object");
                    SnrCoeffs c;
                    bool sz = false, so = false, sd = false, sg = false;
                    for (const auto& [ckey, cval] : e.items()) {
                        if (ckey == "zeta") { c.zeta = number_from_json(cval, ckey); sz = true; }
                        else if (ckey == "o") { c.o = number_from_json(cval, ckey); so = true; }
                        else if (ckey == "delta") { c.delta = number_from_json(cval, ckey); sd = true; }
                        else if (ckey == "gamma") { c.gamma = number_from_json(cval, ckey); sg = true; }
                        else throw std::invalid_argument("unknown coeffs key '" + ckey + "'");
                    }
                    if (!(sz && so && sd && sg))
                        throw std::invalid_argument("coeffs entries need zeta, o, delta and gamma");
                    p.coeffs.push_back(c);
                }
                saw_coeffs = true;
            } else {
                throw std::invalid_argument("unknown profile key '" + key +
                                            "' (expected id, kind, snr_grid, coeffs)");
            }
        }
        if (!(saw_id && saw_kind && saw_grid && saw_coeffs))
            throw std::invalid_argument("profiles need id, kind, snr_grid and coeffs");
        p.validate();
        profiles.push_back(std::move(p));
    }
    return profiles;
}

} // namespace vranfair
