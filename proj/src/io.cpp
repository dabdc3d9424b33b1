#include "seisnoise/io.hpp"

#include "seisnoise/errors.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

namespace seisnoise {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// text helpers

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur)) lines.push_back(cur);
    return lines;
}

std::optional<double> to_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) return std::nullopt;
    return v;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

// ---------------------------------------------------------------------------
// key = value files

struct Entry {
    std::string key;
    std::string value;
    std::size_t line;
};

std::string strip_quotes(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) return v.substr(1, v.size() - 2);
    return v;
}

std::vector<Entry> parse_key_values(const std::string& text) {
    std::vector<Entry> out;
    std::set<std::string> seen;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        bool quoted = false;
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (line[k] == '"') quoted = !quoted;
            if (line[k] == '#' && !quoted) {
                line.resize(k);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", i + 1);
        Entry e{trim(line.substr(0, eq)), strip_quotes(trim(line.substr(eq + 1))), i + 1};
        if (e.key.empty()) throw ParseError("empty key", i + 1);
        if (!seen.insert(e.key).second) throw ParseError("duplicate key '" + e.key + "'", i + 1);
        out.push_back(std::move(e));
    }
    return out;
}

double value_double(const Entry& e) {
    auto v = to_double(e.value);
    if (!v || !std::isfinite(*v)) throw ParseError("'" + e.key + "' expects a number, got '" + e.value + "'", e.line);
    return *v;
}

long long value_int(const Entry& e) {
    long long v = 0;
    auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || p != e.value.data() + e.value.size())
        throw ParseError("'" + e.key + "' expects an integer, got '" + e.value + "'", e.line);
    return v;
}

std::size_t value_size(const Entry& e) {
    const auto v = value_int(e);
    if (v < 0) throw ParseError("'" + e.key + "' must be nonnegative", e.line);
    return static_cast<std::size_t>(v);
}

std::uint64_t value_u64(const Entry& e) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || p != e.value.data() + e.value.size())
        throw ParseError("'" + e.key + "' expects an unsigned integer, got '" + e.value + "'", e.line);
    return v;
}

bool value_bool(const Entry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ParseError("'" + e.key + "' expects true or false, got '" + e.value + "'", e.line);
}

std::optional<int> value_auto_int(const Entry& e) {
    if (e.value == "auto") return std::nullopt;
    return static_cast<int>(value_int(e));
}

std::vector<std::string> list_items(const Entry& e) {
    std::string v = e.value;
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ParseError("unterminated list for '" + e.key + "'", e.line);
        v = v.substr(1, v.size() - 2);
    }
    std::vector<std::string> items;
    std::string cur;
    for (char c : v + ",") {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) items.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return items;
}

std::vector<double> value_doubles(const Entry& e) {
    std::vector<double> out;
    for (const auto& s : list_items(e)) out.push_back(value_double({e.key, s, e.line}));
    return out;
}

std::vector<int> value_ints(const Entry& e) {
    std::vector<int> out;
    for (const auto& s : list_items(e)) out.push_back(static_cast<int>(value_int({e.key, s, e.line})));
    return out;
}

std::string join(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
    return out;
}

// ---------------------------------------------------------------------------
// JSON helpers

json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return std::strtod(g6(v).c_str(), nullptr);
}

json nums(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

json opt_num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

double get_num(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw ParseError("expected a number, got '" + s + "'");
    }
    return j.get<double>();
}

std::vector<double> get_nums(const json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(get_num(x));
    return v;
}

std::optional<double> get_opt_num(const json& j) {
    if (j.is_null()) return std::nullopt;
    return get_num(j);
}

json outcome_json(const TestOutcome& t) {
    json d = json::object();
    for (const auto& [k, v] : t.details) d[k] = num(v);
    return {{"name", t.name},
            {"statistic", num(t.statistic)},
            {"p_value", opt_num(t.p_value)},
            {"critical", {{"lower", opt_num(t.critical_lower)}, {"upper", opt_num(t.critical_upper)}}},
            {"tail", to_string(t.tail)},
            {"reject", t.reject_null},
            {"alpha", num(t.alpha)},
            {"details", d}};
}

TestOutcome outcome_from(const json& j) {
    TestOutcome t;
    t.name = j.at("name").get<std::string>();
    t.statistic = get_num(j.at("statistic"));
    t.p_value = get_opt_num(j.at("p_value"));
    t.critical_lower = get_opt_num(j.at("critical").at("lower"));
    t.critical_upper = get_opt_num(j.at("critical").at("upper"));
    t.tail = tail_from_string(j.at("tail").get<std::string>());
    t.reject_null = j.at("reject").get<bool>();
    t.alpha = get_num(j.at("alpha"));
    for (const auto& [k, v] : j.at("details").items()) t.details[k] = get_num(v);
    return t;
}

json opt_outcome(const std::optional<TestOutcome>& t) { return t ? outcome_json(*t) : json(nullptr); }

std::optional<TestOutcome> get_opt_outcome(const json& j) {
    if (j.is_null()) return std::nullopt;
    return outcome_from(j);
}

json config_json(const PipelineConfig& c) {
    const auto& e = c.embedding;
    return {{"alpha", num(c.alpha)},
            {"n_samples", c.n_samples},
            {"n_surrogates", c.n_surrogates},
            {"sw_sample", c.sw_sample},
            {"d_max", c.d_max},
            {"p_max", c.p_max},
            {"m_max", c.m_max},
            {"garch_p", c.garch_P},
            {"garch_q", c.garch_Q},
            {"arch_lags", c.arch_lags},
            {"embedding",
             {{"dimension", e.dimension},
              {"delay", e.delay ? json(*e.delay) : json("auto")},
              {"theiler_window", e.theiler_window ? json(*e.theiler_window) : json("auto")},
              {"max_reference_points", e.max_reference_points},
              {"seed", e.seed},
              {"fit_c_low", num(e.fit_c_low)},
              {"fit_c_high", num(e.fit_c_high)}}},
            {"ar1_verification", c.ar1_verification},
            {"seed", c.seed},
            {"threads", c.threads}};
}

std::optional<int> get_auto_int(const json& j) {
    if (j.is_string()) return std::nullopt;
    return j.get<int>();
}

PipelineConfig config_from(const json& j) {
    PipelineConfig c;
    c.alpha = get_num(j.at("alpha"));
    c.n_samples = j.at("n_samples").get<std::size_t>();
    c.n_surrogates = j.at("n_surrogates").get<int>();
    c.sw_sample = j.at("sw_sample").get<std::size_t>();
    c.d_max = j.at("d_max").get<int>();
    c.p_max = j.at("p_max").get<int>();
    c.m_max = j.at("m_max").get<int>();
    c.garch_P = j.at("garch_p").get<std::vector<int>>();
    c.garch_Q = j.at("garch_q").get<std::vector<int>>();
    c.arch_lags = j.at("arch_lags").get<int>();
    const auto& e = j.at("embedding");
    c.embedding.dimension = e.at("dimension").get<int>();
    c.embedding.delay = get_auto_int(e.at("delay"));
    c.embedding.theiler_window = get_auto_int(e.at("theiler_window"));
    c.embedding.max_reference_points = e.at("max_reference_points").get<int>();
    c.embedding.seed = e.at("seed").get<std::uint64_t>();
    c.embedding.fit_c_low = get_num(e.at("fit_c_low"));
    c.embedding.fit_c_high = get_num(e.at("fit_c_high"));
    c.ar1_verification = j.at("ar1_verification").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<int>();
    return c;
}

json arima_json(const ArimaModel& m) {
    return {{"orders", {{"p", m.p}, {"d", m.d}, {"m", m.m}}},
            {"coefficients", {{"ar", nums(m.ar)}, {"ma", nums(m.ma)}, {"mean", num(m.mean)}}},
            {"std_errors", {{"ar", nums(m.ar_se)}, {"ma", nums(m.ma_se)}}},
            {"free", {{"ar", m.ar_free}, {"ma", m.ma_free}}},
            {"includes_mean", m.includes_mean},
            {"sigma2", num(m.innovation_variance)},
            {"n_fit", m.n_fit},
            {"log_likelihood", num(m.log_likelihood)},
            {"aic", num(m.aic)},
            {"bic", num(m.bic)},
            {"boundary", m.boundary},
            {"not_validated", m.not_validated}};
}

ArimaModel arima_from(const json& j) {
    ArimaModel m;
    m.p = j.at("orders").at("p").get<int>();
    m.d = j.at("orders").at("d").get<int>();
    m.m = j.at("orders").at("m").get<int>();
    m.ar = get_nums(j.at("coefficients").at("ar"));
    m.ma = get_nums(j.at("coefficients").at("ma"));
    m.mean = get_num(j.at("coefficients").at("mean"));
    m.ar_se = get_nums(j.at("std_errors").at("ar"));
    m.ma_se = get_nums(j.at("std_errors").at("ma"));
    m.ar_free = j.at("free").at("ar").get<std::vector<bool>>();
    m.ma_free = j.at("free").at("ma").get<std::vector<bool>>();
    m.includes_mean = j.at("includes_mean").get<bool>();
    m.innovation_variance = get_num(j.at("sigma2"));
    m.n_fit = j.at("n_fit").get<std::size_t>();
    m.log_likelihood = get_num(j.at("log_likelihood"));
    m.aic = get_num(j.at("aic"));
    m.bic = get_num(j.at("bic"));
    m.boundary = j.at("boundary").get<bool>();
    m.not_validated = j.at("not_validated").get<bool>();
    return m;
}

json garch_json(const GarchModel& m) {
    return {{"orders", {{"P", m.P}, {"Q", m.Q}}},
            {"coefficients", {{"c0", num(m.c0)}, {"arch", nums(m.arch)}, {"garch", nums(m.garch)}}},
            {"std_errors", {{"c0", num(m.c0_se)}, {"arch", nums(m.arch_se)}, {"garch", nums(m.garch_se)}}},
            {"persistence", num(m.persistence())},
            {"n_fit", m.n_fit},
            {"log_likelihood", num(m.log_likelihood)},
            {"aic", num(m.aic)},
            {"bic", num(m.bic)},
            {"nonstationary_variance", m.nonstationary_variance},
            {"near_integrated_variance", m.near_integrated_variance},
            {"not_validated", m.not_validated}};
}

GarchModel garch_from(const json& j) {
    GarchModel m;
    m.P = j.at("orders").at("P").get<int>();
    m.Q = j.at("orders").at("Q").get<int>();
    m.c0 = get_num(j.at("coefficients").at("c0"));
    m.arch = get_nums(j.at("coefficients").at("arch"));
    m.garch = get_nums(j.at("coefficients").at("garch"));
    m.c0_se = get_num(j.at("std_errors").at("c0"));
    m.arch_se = get_nums(j.at("std_errors").at("arch"));
    m.garch_se = get_nums(j.at("std_errors").at("garch"));
    m.n_fit = j.at("n_fit").get<std::size_t>();
    m.log_likelihood = get_num(j.at("log_likelihood"));
    m.aic = get_num(j.at("aic"));
    m.bic = get_num(j.at("bic"));
    m.nonstationary_variance = j.at("nonstationary_variance").get<bool>();
    m.near_integrated_variance = j.at("near_integrated_variance").get<bool>();
    m.not_validated = j.at("not_validated").get<bool>();
    return m;
}

json diagnostics_json(const ReportDiagnostics& d) {
    json stages = json::array();
    for (const auto& s : d.integration_stages)
        stages.push_back({{"d", s.d},
                          {"psr_run", s.psr_run},
                          {"heteroskedastic", s.heteroskedastic},
                          {"ar1", num(s.ar1)},
                          {"adf", opt_outcome(s.adf)},
                          {"pp", opt_outcome(s.pp)},
                          {"integrating", s.integrating},
                          {"method", s.method}});
    json orders = json::array();
    for (const auto& c : d.order_candidates)
        orders.push_back({{"p", c.p},
                          {"m", c.m},
                          {"aic", num(c.aic)},
                          {"white", c.white},
                          {"significant", c.significant},
                          {"redundant", c.redundant},
                          {"estimated", c.estimated}});
    json garch = json::array();
    for (const auto& c : d.garch_candidates)
        garch.push_back(
            {{"P", c.P}, {"Q", c.Q}, {"aic", num(c.aic)}, {"accepted", c.accepted}, {"estimated", c.estimated}});
    return {{"difference_passes", d.difference_passes},
            {"integration_stages", stages},
            {"still_integrating", d.still_integrating},
            {"order_candidates", orders},
            {"order_reductions", d.order_reductions},
            {"insignificant_params", d.insignificant_params},
            {"arima_converged", d.arima_converged},
            {"sw_offset", d.sw_offset},
            {"sw_count", d.sw_count},
            {"squared_residual_acf_outside", num(d.squared_residual_acf_outside)},
            {"linearity_d2", num(d.linearity_d2)},
            {"surrogate_d2", nums(d.surrogate_d2)},
            {"garch_candidates", garch}};
}

ReportDiagnostics diagnostics_from(const json& j) {
    ReportDiagnostics d;
    d.difference_passes = j.at("difference_passes").get<int>();
    for (const auto& s : j.at("integration_stages")) {
        IntegrationStage st;
        st.d = s.at("d").get<int>();
        st.psr_run = s.at("psr_run").get<bool>();
        st.heteroskedastic = s.at("heteroskedastic").get<bool>();
        st.ar1 = get_num(s.at("ar1"));
        st.adf = get_opt_outcome(s.at("adf"));
        st.pp = get_opt_outcome(s.at("pp"));
        st.integrating = s.at("integrating").get<bool>();
        st.method = s.at("method").get<std::string>();
        d.integration_stages.push_back(std::move(st));
    }
    d.still_integrating = j.at("still_integrating").get<bool>();
    for (const auto& c : j.at("order_candidates"))
        d.order_candidates.push_back({c.at("p").get<int>(), c.at("m").get<int>(), get_num(c.at("aic")),
                                      c.at("white").get<bool>(), c.at("significant").get<bool>(),
                                      c.at("redundant").get<bool>(), c.at("estimated").get<bool>()});
    d.order_reductions = j.at("order_reductions").get<int>();
    d.insignificant_params = j.at("insignificant_params").get<std::vector<std::string>>();
    d.arima_converged = j.at("arima_converged").get<bool>();
    d.sw_offset = j.at("sw_offset").get<std::size_t>();
    d.sw_count = j.at("sw_count").get<std::size_t>();
    d.squared_residual_acf_outside = get_num(j.at("squared_residual_acf_outside"));
    d.linearity_d2 = get_num(j.at("linearity_d2"));
    d.surrogate_d2 = get_nums(j.at("surrogate_d2"));
    for (const auto& c : j.at("garch_candidates"))
        d.garch_candidates.push_back({c.at("P").get<int>(), c.at("Q").get<int>(), get_num(c.at("aic")),
                                      c.at("accepted").get<bool>(), c.at("estimated").get<bool>()});
    return d;
}

// ---------------------------------------------------------------------------
// FDSN

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string url_location(const std::string& loc) { return loc.empty() ? "--" : loc; }

Series::Meta request_meta(const DatasetRequest& r) {
    return {{"source", "fdsn:" + r.network + "." + r.station + "." + r.location + "." + r.channel},
            {"network", r.network},
            {"station", r.station},
            {"location", r.location},
            {"channel", r.channel},
            {"start", r.start},
            {"end", r.end}};
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV

Series parse_csv(const std::string& text, std::optional<double> rate) {
    std::optional<double> header_rate;
    std::vector<double> values;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        if (line.front() == '#') {
            const std::string body = trim(line.substr(1));
            const std::string key = "sample_rate=";
            if (body.rfind(key, 0) == 0) {
                auto r = to_double(trim(body.substr(key.size())));
                if (!r || !(*r > 0.0) || !std::isfinite(*r)) throw ParseError("invalid sample_rate header", i + 1);
                header_rate = r;
            }
            continue;
        }
        auto v = to_double(line);
        if (!v) throw ParseError("malformed value '" + line + "'", i + 1);
        if (!std::isfinite(*v)) throw ParseError("non-finite value '" + line + "'", i + 1);
        values.push_back(*v);
    }
    if (values.empty()) throw ParseError("no samples");
    const auto r = rate ? rate : header_rate;
    if (!r) throw ParseError("missing sample rate: add a '# sample_rate=' header or pass a rate");
    if (!(*r > 0.0) || !std::isfinite(*r)) throw ArgumentError("sample rate must be positive");
    return Series(std::move(values), *r);
}

Series read_csv(const fs::path& path, std::optional<double> rate) {
    const auto text = read_file(path);
    try {
        const auto s = parse_csv(text, rate);
        return Series(s.data(), s.sample_rate(), {{"source", path.string()}});
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_csv(const Series& s, const fs::path& path) {
    std::string out = "# sample_rate=" + g17(s.sample_rate()) + "\n";
    for (double v : s.values()) out += g17(v) + "\n";
    write_file(path, out);
}

// ---------------------------------------------------------------------------
// FDSN

double parse_utc(const std::string& ts) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    std::string t = ts;
    if (!t.empty() && t.back() == 'Z') t.pop_back();
    int got = std::sscanf(t.c_str(), "%4d-%2d-%2dT%2d:%2d:%lf", &y, &mo, &d, &h, &mi, &sec);
    if (got != 6) {
        char tail = 0;
        if (std::sscanf(t.c_str(), "%4d-%2d-%2d%c", &y, &mo, &d, &tail) != 3)
            throw ArgumentError("invalid UTC timestamp '" + ts + "'");
        h = mi = 0;
        sec = 0.0;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0)
        throw ArgumentError("invalid UTC timestamp '" + ts + "'");
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    return static_cast<double>(timegm(&tm)) + sec;
}

void DatasetRequest::validate() const {
    if (network.empty() || station.empty() || channel.empty()) throw ArgumentError("network, station and channel are required");
    if (!(sample_rate > 0.0)) throw ArgumentError("expected sample rate must be positive");
    if (!(parse_utc(start) < parse_utc(end))) throw ArgumentError("start must precede end");
}

double DatasetRequest::duration_seconds() const { return parse_utc(end) - parse_utc(start); }

std::string cache_key(const DatasetRequest& r) {
    return sha256_hex(r.network + "|" + r.station + "|" + r.location + "|" + r.channel + "|" + r.start + "|" + r.end +
                      "|" + g17(r.sample_rate));
}

std::string fdsn_query(const DatasetRequest& r) {
    return "net=" + r.network + "&sta=" + r.station + "&loc=" + url_location(r.location) + "&cha=" + r.channel +
           "&starttime=" + r.start + "&endtime=" + r.end + "&output=ascii";
}

Series parse_fdsn_ascii(const std::string& payload, const DatasetRequest& req) {
    std::vector<double> values;
    int segments = 0;
    std::optional<std::size_t> declared;
    std::size_t in_segment = 0;
    auto close_segment = [&](std::size_t line) {
        if (declared && in_segment != *declared)
            throw FetchError("truncated payload: segment ending before line " + std::to_string(line) + " has " +
                             std::to_string(in_segment) + " of " + std::to_string(*declared) + " samples");
    };
    const auto lines = split_lines(payload);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        std::istringstream tokens(line);
        std::vector<std::string> tok;
        for (std::string t; tokens >> t;) tok.push_back(t);
        auto v = to_double(tok.back());
        if (!v || (tok.size() > 2)) {
            // Header line, e.g. "TIMESERIES IU_ANMO_00_BHZ_D, 72000 samples, 20 sps, ..."
            close_segment(i + 1);
            ++segments;
            in_segment = 0;
            declared.reset();
            for (std::size_t k = 1; k < tok.size(); ++k) {
                auto prev = to_double(trim(tok[k - 1]));
                std::string unit = tok[k];
                while (!unit.empty() && unit.back() == ',') unit.pop_back();
                if (!prev) continue;
                if (unit == "samples") declared = static_cast<std::size_t>(*prev);
                if (unit == "sps" && std::abs(*prev - req.sample_rate) > 1e-6 * req.sample_rate)
                    throw FetchError("sample rate mismatch: payload " + g6(*prev) + " sps, expected " +
                                     g6(req.sample_rate));
            }
            continue;
        }
        if (segments == 0) throw FetchError("payload has no header line");
        if (!std::isfinite(*v)) throw FetchError("non-finite sample at line " + std::to_string(i + 1));
        values.push_back(*v);
        ++in_segment;
    }
    close_segment(lines.size() + 1);
    if (values.empty()) throw FetchError("payload contains no samples");
    const double expected = req.duration_seconds() * req.sample_rate;
    if (std::abs(static_cast<double>(values.size()) - expected) > 0.01 * expected)
        throw FetchError("sample count " + std::to_string(values.size()) + " differs from the expected " + g6(expected) +
                         " by more than 1%");
    auto meta = request_meta(req);
    meta["segments"] = std::to_string(segments);
    return Series(std::move(values), req.sample_rate, std::move(meta));
}

Series fetch_fdsn(const DatasetRequest& req, const FetchOptions& opts) {
    req.validate();
    const fs::path cached = opts.cache_dir / (cache_key(req) + ".txt");
    if (opts.use_cache && fs::exists(cached)) return parse_fdsn_ascii(read_file(cached), req);

    const auto scheme_end = opts.endpoint.find("://");
    if (scheme_end == std::string::npos) throw ArgumentError("endpoint must be an http(s) URL: " + opts.endpoint);
    const auto path_start = opts.endpoint.find('/', scheme_end + 3);
    const std::string host = opts.endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : opts.endpoint.substr(path_start);

    httplib::Client cli(host);
    cli.set_connection_timeout(opts.timeout_seconds);
    cli.set_read_timeout(opts.timeout_seconds);
    cli.set_follow_location(true);
    const auto res = cli.Get(path + "?" + fdsn_query(req));
    if (!res) throw FetchError("request to " + host + " failed: " + httplib::to_string(res.error()));
    if (res->status == 204) throw FetchError("no data for the requested window (HTTP 204)");
    if (res->status != 200) throw FetchError("HTTP " + std::to_string(res->status) + " from " + host);

    auto series = parse_fdsn_ascii(res->body, req);
    if (opts.use_cache) {
        fs::create_directories(opts.cache_dir);
        static std::atomic<unsigned> counter{0};
        const auto tmp = opts.cache_dir / (cache_key(req) + ".tmp." +
                                           std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) +
                                           "." + std::to_string(counter++));
        write_file(tmp, res->body);
        fs::rename(tmp, cached);
    }
    return series;
}

// ---------------------------------------------------------------------------
// configuration files

PipelineConfig parse_pipeline_config(const std::string& text, PipelineConfig c) {
    using Setter = std::function<void(const Entry&)>;
    const std::map<std::string, Setter> setters{
        {"alpha", [&](const Entry& e) { c.alpha = value_double(e); }},
        {"n_samples", [&](const Entry& e) { c.n_samples = value_size(e); }},
        {"n_surrogates", [&](const Entry& e) { c.n_surrogates = static_cast<int>(value_int(e)); }},
        {"sw_sample", [&](const Entry& e) { c.sw_sample = value_size(e); }},
        {"d_max", [&](const Entry& e) { c.d_max = static_cast<int>(value_int(e)); }},
        {"p_max", [&](const Entry& e) { c.p_max = static_cast<int>(value_int(e)); }},
        {"m_max", [&](const Entry& e) { c.m_max = static_cast<int>(value_int(e)); }},
        {"garch_p", [&](const Entry& e) { c.garch_P = value_ints(e); }},
        {"garch_q", [&](const Entry& e) { c.garch_Q = value_ints(e); }},
        {"arch_lags", [&](const Entry& e) { c.arch_lags = static_cast<int>(value_int(e)); }},
        {"embedding_dimension", [&](const Entry& e) { c.embedding.dimension = static_cast<int>(value_int(e)); }},
        {"embedding_delay", [&](const Entry& e) { c.embedding.delay = value_auto_int(e); }},
        {"theiler_window", [&](const Entry& e) { c.embedding.theiler_window = value_auto_int(e); }},
        {"max_reference_points",
         [&](const Entry& e) { c.embedding.max_reference_points = static_cast<int>(value_int(e)); }},
        {"embedding_seed", [&](const Entry& e) { c.embedding.seed = value_u64(e); }},
        {"fit_c_low", [&](const Entry& e) { c.embedding.fit_c_low = value_double(e); }},
        {"fit_c_high", [&](const Entry& e) { c.embedding.fit_c_high = value_double(e); }},
        {"ar1_verification", [&](const Entry& e) { c.ar1_verification = value_bool(e); }},
        {"seed", [&](const Entry& e) { c.seed = value_u64(e); }},
        {"threads", [&](const Entry& e) { c.threads = static_cast<int>(value_int(e)); }},
    };
    for (const auto& e : parse_key_values(text)) {
        auto it = setters.find(e.key);
        if (it == setters.end()) throw ParseError("unknown key '" + e.key + "'", e.line);
        it->second(e);
    }
    c.validate();
    return c;
}

PipelineConfig load_pipeline_config(const fs::path& path, PipelineConfig base) {
    try {
        return parse_pipeline_config(read_file(path), std::move(base));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_pipeline_config(const PipelineConfig& c) {
    const auto& e = c.embedding;
    std::ostringstream o;
    o << "alpha = " << g17(c.alpha) << "\n"
      << "n_samples = " << c.n_samples << "\n"
      << "n_surrogates = " << c.n_surrogates << "\n"
      << "sw_sample = " << c.sw_sample << "\n"
      << "d_max = " << c.d_max << "\n"
      << "p_max = " << c.p_max << "\n"
      << "m_max = " << c.m_max << "\n"
      << "garch_p = [" << join(c.garch_P) << "]\n"
      << "garch_q = [" << join(c.garch_Q) << "]\n"
      << "arch_lags = " << c.arch_lags << "\n"
      << "embedding_dimension = " << e.dimension << "\n"
      << "embedding_delay = " << (e.delay ? std::to_string(*e.delay) : "auto") << "\n"
      << "theiler_window = " << (e.theiler_window ? std::to_string(*e.theiler_window) : "auto") << "\n"
      << "max_reference_points = " << e.max_reference_points << "\n"
      << "embedding_seed = " << e.seed << "\n"
      << "fit_c_low = " << g17(e.fit_c_low) << "\n"
      << "fit_c_high = " << g17(e.fit_c_high) << "\n"
      << "ar1_verification = " << (c.ar1_verification ? "true" : "false") << "\n"
      << "seed = " << c.seed << "\n"
      << "threads = " << c.threads << "\n";
    return o.str();
}

ProcessSpec parse_process_spec(const std::string& text) {
    ProcessSpec s;
    std::vector<double> ar, ma, arch, garch;
    int d = 0;
    double mean = 0.0, innovation_variance = 1.0, c0 = 0.0;
    bool has_arima = false, has_garch = false, has_kind = false;
    using Setter = std::function<void(const Entry&)>;
    const std::map<std::string, Setter> setters{
        {"kind",
         [&](const Entry& e) {
             try {
                 s.kind = process_kind_from_string(e.value);
             } catch (const ArgumentError&) {
                 throw ParseError("unknown process kind '" + e.value + "'", e.line);
             }
             has_kind = true;
         }},
        {"n", [&](const Entry& e) { s.n = value_size(e); }},
        {"seed", [&](const Entry& e) { s.seed = value_u64(e); }},
        {"sample_rate", [&](const Entry& e) { s.sample_rate = value_double(e); }},
        {"ar", [&](const Entry& e) { ar = value_doubles(e), has_arima = true; }},
        {"ma", [&](const Entry& e) { ma = value_doubles(e), has_arima = true; }},
        {"d", [&](const Entry& e) { d = static_cast<int>(value_int(e)), has_arima = true; }},
        {"mean", [&](const Entry& e) { mean = value_double(e), has_arima = true; }},
        {"innovation_variance", [&](const Entry& e) { innovation_variance = value_double(e), has_arima = true; }},
        {"c0", [&](const Entry& e) { c0 = value_double(e), has_garch = true; }},
        {"arch", [&](const Entry& e) { arch = value_doubles(e), has_garch = true; }},
        {"garch", [&](const Entry& e) { garch = value_doubles(e), has_garch = true; }},
        {"variance", [&](const Entry& e) { s.variance = value_double(e); }},
        {"sigma1", [&](const Entry& e) { s.sigma1 = value_double(e); }},
        {"sigma2", [&](const Entry& e) { s.sigma2 = value_double(e); }},
        {"bilinear_a", [&](const Entry& e) { s.bilinear_a = value_double(e); }},
        {"bilinear_b", [&](const Entry& e) { s.bilinear_b = value_double(e); }},
        {"henon_a", [&](const Entry& e) { s.henon_a = value_double(e); }},
        {"henon_b", [&](const Entry& e) { s.henon_b = value_double(e); }},
    };
    for (const auto& e : parse_key_values(text)) {
        auto it = setters.find(e.key);
        if (it == setters.end()) throw ParseError("unknown key '" + e.key + "'", e.line);
        it->second(e);
    }
    if (!has_kind) throw ParseError("process spec needs a 'kind'");
    if (has_arima) s.arima = make_arima(ar, d, ma, innovation_variance, mean);
    if (has_garch) s.garch = make_garch(c0, arch, garch);
    validate(s);
    return s;
}

ProcessSpec load_process_spec(const fs::path& path) {
    try {
        return parse_process_spec(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// reports

std::string report_to_json(const CharacterizationReport& r) {
    json tests = json::object();
    for (const auto& [k, t] : r.tests) tests[k] = outcome_json(t);
    json log = json::array();
    for (const auto& e : r.stage_log) log.push_back({{"stage", e.stage}, {"summary", e.summary}});
    json j = {{"input",
               {{"source", r.input.source},
                {"meta", r.input.meta},
                {"sample_rate", num(r.input.sample_rate)},
                {"n_input", r.input.n_input},
                {"n_analyzed", r.input.n_analyzed}}},
              {"config", config_json(r.config)},
              {"complete", r.complete},
              {"failure", r.failure},
              {"warnings", r.warnings},
              {"integration_order", r.integration_order},
              {"verdicts",
               {{"heteroskedastic", r.heteroskedastic},
                {"linear", r.linear},
                {"gaussian", r.gaussian},
                {"arch_effect", r.arch_effect}}},
              {"tests", tests},
              {"arima", r.arima ? arima_json(*r.arima) : json(nullptr)},
              {"garch", r.garch ? garch_json(*r.garch) : json(nullptr)},
              {"diagnostics", diagnostics_json(r.diagnostics)},
              {"stage_log", log}};
    return j.dump(2) + "\n";
}

CharacterizationReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid report JSON: ") + e.what());
    }
    try {
        CharacterizationReport r;
        const auto& in = j.at("input");
        r.input.source = in.at("source").get<std::string>();
        r.input.meta = in.at("meta").get<Series::Meta>();
        r.input.sample_rate = get_num(in.at("sample_rate"));
        r.input.n_input = in.at("n_input").get<std::size_t>();
        r.input.n_analyzed = in.at("n_analyzed").get<std::size_t>();
        r.config = config_from(j.at("config"));
        r.complete = j.at("complete").get<bool>();
        r.failure = j.at("failure").get<std::string>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        r.integration_order = j.at("integration_order").get<int>();
        const auto& v = j.at("verdicts");
        r.heteroskedastic = v.at("heteroskedastic").get<bool>();
        r.linear = v.at("linear").get<bool>();
        r.gaussian = v.at("gaussian").get<bool>();
        r.arch_effect = v.at("arch_effect").get<bool>();
        for (const auto& [k, t] : j.at("tests").items()) r.tests[k] = outcome_from(t);
        if (!j.at("arima").is_null()) r.arima = arima_from(j.at("arima"));
        if (!j.at("garch").is_null()) r.garch = garch_from(j.at("garch"));
        r.diagnostics = diagnostics_from(j.at("diagnostics"));
        for (const auto& e : j.at("stage_log"))
            r.stage_log.push_back({e.at("stage").get<std::string>(), e.at("summary").get<std::string>()});
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
}

void write_report(const CharacterizationReport& r, const fs::path& path) { write_file(path, report_to_json(r)); }

CharacterizationReport read_report(const fs::path& path) { return report_from_json(read_file(path)); }

std::vector<fs::path> emit_plot_data(const CharacterizationReport& r, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    for (const auto& [key, p] : r.plots) {
        std::string out = csv_field(p.x_label) + "," + csv_field(p.y_label) + "\n";
        for (std::size_t i = 0; i < p.x.size(); ++i) out += g6(p.x[i]) + "," + g6(p.y[i]) + "\n";
        const auto path = dir / (key + ".csv");
        write_file(path, out);
        written.push_back(path);
    }
    return written;
}

std::vector<fs::path> write_batch(const BatchResult& b, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    std::string summary =
        "index,label,status,integration_order,heteroskedastic,linear,gaussian,arch_effect,arima,garch,aic,sigma2,error\n";
    auto yn = [](bool v) { return v ? "1" : "0"; };
    for (std::size_t i = 0; i < b.entries.size(); ++i) {
        const auto& e = b.entries[i];
        std::string row = std::to_string(i) + "," + csv_field(e.label) + ",";
        if (e.report) {
            const auto path = dir / ("report_" + std::to_string(i) + ".json");
            write_report(*e.report, path);
            written.push_back(path);
        }
        if (e.report && e.report->complete) {
            const auto& r = *e.report;
            row += std::string("ok,") + std::to_string(r.integration_order) + "," + yn(r.heteroskedastic) + "," +
                   yn(r.linear) + "," + yn(r.gaussian) + "," + yn(r.arch_effect) + "," +
                   csv_field(r.arima ? r.arima->order_string() : "") + "," +
                   csv_field(r.garch ? r.garch->order_string() : "") +
                   "," + (r.arima ? g6(r.arima->aic) : "") + "," + (r.arima ? g6(r.arima->innovation_variance) : "") +
                   ",";
        } else {
            row += "failed,,,,,,,,,," + csv_field(e.error);
        }
        summary += row + "\n";
    }
    write_file(dir / "summary.csv", summary);
    written.push_back(dir / "summary.csv");

    const auto& s = b.summary;
    json by_order = json::object();
    for (const auto& [d, p] : s.pct_by_order) by_order[std::to_string(d)] = num(p);
    const json agg = {{"total", s.total},
                      {"succeeded", s.succeeded},
                      {"failed", s.failed},
                      {"pct_integrating", num(s.pct_integrating)},
                      {"pct_heteroskedastic", num(s.pct_heteroskedastic)},
                      {"pct_nonlinear", num(s.pct_nonlinear)},
                      {"pct_gaussian", num(s.pct_gaussian)},
                      {"pct_arch", num(s.pct_arch)},
                      {"pct_by_order", by_order}};
    write_file(dir / "aggregate.json", agg.dump(2) + "\n");
    written.push_back(dir / "aggregate.json");

    std::string traj = "index,label,order,aic,sigma2,ar,ma\n";
    for (const auto& t : s.trajectory) {
        std::string a, m;
        for (std::size_t k = 0; k < t.ar.size(); ++k) a += (k ? ";" : "") + g6(t.ar[k]);
        for (std::size_t k = 0; k < t.ma.size(); ++k) m += (k ? ";" : "") + g6(t.ma[k]);
        traj += std::to_string(t.index) + "," + csv_field(b.entries[t.index].label) + "," + csv_field(t.order) + "," +
                g6(t.aic) + "," + g6(t.innovation_variance) + "," + a + "," + m + "\n";
    }
    write_file(dir / "trajectory.csv", traj);
    written.push_back(dir / "trajectory.csv");
    return written;
}

}  // namespace seisnoise
