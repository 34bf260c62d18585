#include "lmcurv/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lmcurv {

using nlohmann::ordered_json;

const char* to_string(Grading g) { return g == Grading::uniform ? "uniform" : "graded"; }

namespace {

// ---- block text -> json tree

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) {}

    std::string peek() {
        const auto save = pos_;
        const auto line = line_;
        auto t = next();
        pos_ = save;
        line_ = line;
        return t;
    }

    std::string next() {
        skip();
        if (pos_ >= s_.size()) return {};
        const char c = s_[pos_];
        if (std::string("{}[]=,").find(c) != std::string::npos) {
            ++pos_;
            return std::string(1, c);
        }
        if (c == '"') {
            std::string out = "\"";
            ++pos_;
            while (pos_ < s_.size() && s_[pos_] != '"') out += s_[pos_++];
            if (pos_ >= s_.size()) fail("unterminated string");
            ++pos_;
            return out + "\"";
        }
        std::string out;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
               std::string("{}[]=,#").find(s_[pos_]) == std::string::npos)
            out += s_[pos_++];
        return out;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config line " + std::to_string(line_) + ": " + what);
    }

private:
    void skip() {
        while (pos_ < s_.size()) {
            if (s_[pos_] == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                if (s_[pos_] == '\n') ++line_;
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

ordered_json scalar(const std::string& tok) {
    if (tok.size() >= 2 && tok.front() == '"') return tok.substr(1, tok.size() - 2);
    if (tok == "true") return true;
    if (tok == "false") return false;
    char* end = nullptr;
    const double d = std::strtod(tok.c_str(), &end);
    if (!tok.empty() && end == tok.c_str() + tok.size()) {
        if (tok.find_first_of(".eE") == std::string::npos && std::fabs(d) < 9e15)
            return static_cast<std::int64_t>(d);
        return d;
    }
    return tok;
}

ordered_json parse_block(Lexer& lx, bool top) {
    ordered_json obj = ordered_json::object();
    while (true) {
        auto key = lx.next();
        if (key.empty()) {
            if (!top) lx.fail("missing '}'");
            return obj;
        }
        if (key == "}") {
            if (top) lx.fail("unexpected '}'");
            return obj;
        }
        if (std::string("{[]=,").find(key[0]) != std::string::npos) lx.fail("expected a key, got '" + key + "'");
        if (obj.contains(key)) lx.fail("duplicate key '" + key + "'");
        auto t = lx.next();
        if (t == "{") {
            obj[key] = parse_block(lx, false);
        } else if (t == "=") {
            auto v = lx.next();
            if (v == "[") {
                ordered_json arr = ordered_json::array();
                while (true) {
                    auto e = lx.next();
                    if (e == "]") break;
                    if (e.empty() || std::string("{}[=").find(e[0]) != std::string::npos) lx.fail("bad list");
                    arr.push_back(scalar(e));
                    if (lx.peek() == ",") lx.next();
                }
                obj[key] = arr;
            } else if (v == "{") {
                obj[key] = parse_block(lx, false);
            } else {
                if (v.empty() || std::string("{}[]=,").find(v[0]) != std::string::npos)
                    lx.fail("missing value for '" + key + "'");
                obj[key] = scalar(v);
            }
        } else {
            lx.fail("expected '=' or '{' after '" + key + "'");
        }
    }
}

// ---- json tree -> RunConfig, tracking consumed keys

class Reader {
public:
    Reader(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected a block");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    double number(const std::string& k) {
        const auto& v = get(k);
        if (!v.is_number()) throw ConfigError(key(k) + ": expected a number");
        return v.get<double>();
    }
    double number(const std::string& k, double dflt) { return has(k) ? number(k) : dflt; }

    std::int64_t integer(const std::string& k) {
        const auto& v = get(k);
        if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>()))
            throw ConfigError(key(k) + ": expected an integer");
        return v.is_number_integer() ? v.get<std::int64_t>() : static_cast<std::int64_t>(v.get<double>());
    }
    std::int64_t integer(const std::string& k, std::int64_t dflt) { return has(k) ? integer(k) : dflt; }

    std::string text(const std::string& k) {
        const auto& v = get(k);
        if (!v.is_string()) throw ConfigError(key(k) + ": expected a word");
        return v.get<std::string>();
    }
    std::string text(const std::string& k, const std::string& dflt) { return has(k) ? text(k) : dflt; }

    Reader block(const std::string& k) {
        const auto& v = get(k);
        return Reader(v, key(k));
    }

    const ordered_json& raw(const std::string& k) { return get(k); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(key(it.key()) + ": unknown key");
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    std::string where() const { return path_.empty() ? "config" : path_; }

private:
    const ordered_json& get(const std::string& k) {
        if (!j_.contains(k)) throw ConfigError(key(k) + ": missing required key");
        used_.insert(k);
        return j_.at(k);
    }

    const ordered_json& j_;
    std::string path_;
    std::set<std::string> used_;
};

WeightSpec read_weight(Reader r) {
    WeightSpec w;
    const auto kind = r.text("kind", "constant");
    if (kind == "constant") {
        w.kind = WeightSpec::Kind::constant;
        w.at_origin = r.number("value", 1.0);
        w.at_radius = w.at_origin;
    } else if (kind == "linear") {
        w.kind = WeightSpec::Kind::linear;
        w.at_origin = r.number("at_origin");
        w.at_radius = r.number("at_radius");
    } else {
        throw ConfigError(r.key("kind") + ": expected constant or linear");
    }
    r.finish();
    return w;
}

NonlinearitySpec read_nonlinearity(Reader r) {
    const auto fam = r.text("family");
    NonlinearitySpec out;
    if (fam == "pure_power") {
        out = PurePower{r.number("a"), r.number("theta")};
    } else if (fam == "asymmetric_power") {
        out = AsymmetricPower{r.number("a_plus"), r.number("a_minus"), r.number("theta")};
    } else {
        throw ConfigError(r.key("family") + ": expected pure_power or asymmetric_power");
    }
    r.finish();
    return out;
}

GradientTermSpec read_gradient(Reader r) {
    const auto fam = r.text("family", "power");
    if (fam != "power") throw ConfigError(r.key("family") + ": expected power");
    PowerGradient g{r.number("a"), r.number("theta"), r.number("eta")};
    r.finish();
    return g;
}

const std::set<std::string> kTasks = {"thresholds", "minimize", "mountain-pass", "seventh", "shoot",
                                      "solve-all",  "grad-iter", "verify",        "sweep-lambda"};

}  // namespace

ordered_json parse_config_tree(const std::string& text) {
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return ordered_json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("config: invalid JSON: ") + e.what());
        }
    }
    Lexer lx(text);
    return parse_block(lx, true);
}

RunConfig config_from_tree(const ordered_json& tree) {
    RunConfig cfg;
    Reader top(tree, "");
    {
        Reader p = top.block("problem");
        auto& s = cfg.problem;
        s.N = static_cast<int>(p.integer("N"));
        s.R = p.number("R");
        s.lambda = p.number("lambda");
        s.q = p.number("q");
        s.branch = branch_from_string(p.text("branch", "positive"));
        if (p.has("weight_b")) s.weight_b = read_weight(p.block("weight_b"));
        s.nonlinearity = read_nonlinearity(p.block("nonlinearity"));
        if (p.has("gradient_term")) s.gradient_term = read_gradient(p.block("gradient_term"));
        p.finish();
    }
    if (top.has("mesh")) {
        Reader m = top.block("mesh");
        const auto M = m.integer("M", 400);
        if (M < 2) throw ConfigError("mesh.M: need at least 2 cells");
        cfg.mesh.M = static_cast<std::size_t>(M);
        const auto g = m.text("grading", "uniform");
        if (g == "uniform") cfg.mesh.grading = Grading::uniform;
        else if (g == "graded") cfg.mesh.grading = Grading::graded;
        else throw ConfigError("mesh.grading: expected uniform or graded");
        cfg.mesh.gamma = m.number("gamma", 1.0);
        m.finish();
    }
    if (top.has("solver")) {
        Reader s = top.block("solver");
        auto& o = cfg.solver;
        o.tolerance = s.number("tolerance", o.tolerance);
        o.max_iterations = static_cast<int>(s.integer("max_iterations", o.max_iterations));
        o.random_starts = static_cast<int>(s.integer("random_starts", o.random_starts));
        const auto seed = s.integer("seed", static_cast<std::int64_t>(o.seed));
        if (seed < 0) throw ConfigError("solver.seed: must be nonnegative");
        o.seed = static_cast<std::uint64_t>(seed);
        o.path_nodes = static_cast<int>(s.integer("path_nodes", o.path_nodes));
        o.scan_points = static_cast<int>(s.integer("scan_points", o.scan_points));
        o.match_tolerance = s.number("match_tolerance", o.match_tolerance);
        o.iteration_max = static_cast<int>(s.integer("iteration_max", o.iteration_max));
        if (s.has("sweep_fractions")) {
            const auto& a = s.raw("sweep_fractions");
            if (!a.is_array()) throw ConfigError("solver.sweep_fractions: expected a list");
            o.sweep_fractions.clear();
            for (const auto& x : a) {
                if (!x.is_number()) throw ConfigError("solver.sweep_fractions: expected numbers");
                o.sweep_fractions.push_back(x.get<double>());
            }
        }
        if (!(o.tolerance > 0.0)) throw ConfigError("solver.tolerance: must be positive");
        if (o.path_nodes < 2) throw ConfigError("solver.path_nodes: need at least 2");
        if (o.scan_points < 4) throw ConfigError("solver.scan_points: need at least 4");
        s.finish();
    }
    if (top.has("tasks")) {
        const auto& a = top.raw("tasks");
        if (!a.is_array()) throw ConfigError("tasks: expected a list");
        for (const auto& t : a) {
            if (!t.is_string() || !kTasks.count(t.get<std::string>()))
                throw ConfigError("tasks: unknown task " + t.dump());
            cfg.tasks.push_back(t.get<std::string>());
        }
    }
    top.finish();
    try {
        validate(cfg.problem);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig parse_config(const std::string& text) {
    try {
        return config_from_tree(parse_config_tree(text));
    } catch (const std::invalid_argument& e) {  // branch names and similar
        throw ConfigError(e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ordered_json to_json(const ProblemSpec& p) {
    ordered_json j;
    j["N"] = p.N;
    j["R"] = p.R;
    j["lambda"] = p.lambda;
    j["q"] = p.q;
    j["branch"] = to_string(p.branch);
    ordered_json w;
    if (p.weight_b.kind == WeightSpec::Kind::linear) {
        w["kind"] = "linear";
        w["at_origin"] = p.weight_b.at_origin;
        w["at_radius"] = p.weight_b.at_radius;
    } else {
        w["kind"] = "constant";
        w["value"] = p.weight_b.at_origin;
    }
    j["weight_b"] = w;
    ordered_json f;
    if (const auto* pp = std::get_if<PurePower>(&p.nonlinearity)) {
        f["family"] = "pure_power";
        f["a"] = pp->a;
        f["theta"] = pp->theta;
    } else if (const auto* ap = std::get_if<AsymmetricPower>(&p.nonlinearity)) {
        f["family"] = "asymmetric_power";
        f["a_plus"] = ap->a_plus;
        f["a_minus"] = ap->a_minus;
        f["theta"] = ap->theta;
    } else {
        f["family"] = nl_family(p.nonlinearity);
    }
    j["nonlinearity"] = f;
    if (p.gradient_term) {
        ordered_json g;
        if (const auto* pg = std::get_if<PowerGradient>(&*p.gradient_term)) {
            g["family"] = "power";
            g["a"] = pg->a;
            g["theta"] = pg->theta;
            g["eta"] = pg->eta;
        } else {
            g["family"] = "custom";
        }
        j["gradient_term"] = g;
    }
    return j;
}

ordered_json to_json(const RunConfig& cfg) {
    ordered_json j;
    j["problem"] = to_json(cfg.problem);
    j["mesh"] = {{"M", cfg.mesh.M}, {"grading", to_string(cfg.mesh.grading)}, {"gamma", cfg.mesh.gamma}};
    const auto& s = cfg.solver;
    j["solver"] = {{"tolerance", s.tolerance},         {"max_iterations", s.max_iterations},
                   {"random_starts", s.random_starts}, {"seed", s.seed},
                   {"path_nodes", s.path_nodes},       {"scan_points", s.scan_points},
                   {"match_tolerance", s.match_tolerance}, {"iteration_max", s.iteration_max},
                   {"sweep_fractions", s.sweep_fractions}};
    j["tasks"] = cfg.tasks;
    return j;
}

namespace {

std::string format_value(const ordered_json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        const bool plain = !s.empty() && s.find_first_of(" \t\n{}[]=,#\"") == std::string::npos;
        return plain ? s : "\"" + s + "\"";
    }
    if (v.is_number_float()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        auto t = os.str();
        if (t.find_first_of(".eEn") == std::string::npos) t += ".0";
        return t;
    }
    return v.dump();
}

void write_block(std::ostringstream& os, const ordered_json& j, int depth) {
    const std::string pad(2 * depth, ' ');
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it->is_object()) {
            os << pad << it.key() << " {\n";
            write_block(os, *it, depth + 1);
            os << pad << "}\n";
        } else if (it->is_array()) {
            os << pad << it.key() << " = [";
            for (std::size_t k = 0; k < it->size(); ++k) os << (k ? ", " : "") << format_value((*it)[k]);
            os << "]\n";
        } else {
            os << pad << it.key() << " = " << format_value(*it) << "\n";
        }
    }
}

}  // namespace

std::string to_config_text(const RunConfig& cfg) {
    std::ostringstream os;
    write_block(os, to_json(cfg), 0);
    return os.str();
}

}  // namespace lmcurv
