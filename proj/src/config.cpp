#include "tripert/config.hpp"

#include "tripert/cramer.hpp"
#include "tripert/errors.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tripert {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

class Entries {
public:
    Entries(std::map<std::string, std::string> kv, std::string source)
        : kv_(std::move(kv)), source_(std::move(source)) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string text(const std::string& key) {
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError(source_ + ": missing key '" + key + "'");
        used_.insert(key);
        return it->second;
    }

    std::string text_or(const std::string& key, const std::string& fallback) {
        return has(key) ? text(key) : fallback;
    }

    double number(const std::string& key) { return parse_number(key, text(key)); }

    std::vector<double> list(const std::string& key) {
        std::vector<double> out;
        std::stringstream ss(text(key));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
        return out;
    }

    double parse_number(const std::string& key, const std::string& value) const {
        double x = 0.0;
        const char* first = value.data();
        const char* last = first + value.size();
        const auto [ptr, ec] = std::from_chars(first, last, x);
        if (ec != std::errc() || ptr != last) {
            throw ConfigError(source_ + ": key '" + key + "' expects a number, got '" + value + "'");
        }
        return x;
    }

    void reject_unused() const {
        for (const auto& [key, value] : kv_) {
            if (!used_.count(key)) {
                throw ConfigError(source_ + ": unknown key '" + key + "' (or not used by the selected family)");
            }
        }
    }

    const std::string& source() const { return source_; }

private:
    std::map<std::string, std::string> kv_;
    std::set<std::string> used_;
    std::string source_;
};

AFamily read_a(Entries& e) {
    const std::string fam = e.text("a.family");
    if (fam == "lognormal") return LogNormalA{e.number("a.mu"), e.number("a.sigma2")};
    if (fam == "constant") return ConstantA{e.number("a.c")};
    if (fam == "discrete") return DiscreteA{e.list("a.values"), e.list("a.probs")};
    if (fam == "shifted_square") return ShiftedSquareA{e.number("a.lambda"), e.number("a.shift")};
    throw ConfigError(e.source() + ": unknown a.family '" + fam + "'");
}

BFamily read_b(Entries& e, const std::string& p) {
    const std::string fam = e.text(p + ".family");
    if (fam == "constant") return ConstantB{e.number(p + ".c")};
    if (fam == "gaussian") return GaussianB{e.number(p + ".mean"), e.number(p + ".var")};
    if (fam == "exponential") return ExponentialB{e.number(p + ".rate")};
    throw ConfigError(e.source() + ": unknown " + p + ".family '" + fam + "'");
}

bool read_bool(Entries& e, const std::string& key) {
    const std::string v = e.text_or(key, "false");
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(e.source() + ": key '" + key + "' expects true or false");
}

std::string num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

void write_b(std::ostream& os, const std::string& p, const BFamily& b) {
    if (const auto* f = std::get_if<ConstantB>(&b)) {
        os << p << ".family=constant\n" << p << ".c=" << num(f->c) << "\n";
    } else if (const auto* f = std::get_if<GaussianB>(&b)) {
        os << p << ".family=gaussian\n" << p << ".mean=" << num(f->mean) << "\n" << p << ".var=" << num(f->var) << "\n";
    } else {
        os << p << ".family=exponential\n" << p << ".rate=" << num(std::get<ExponentialB>(b).rate) << "\n";
    }
}

}  // namespace

std::map<std::string, std::string> read_key_values(std::istream& in, const std::string& source) {
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }

    return kv;
}

ModelConfig parse_model(std::istream& in, const std::string& source) {
    std::map<std::string, std::string> kv = read_key_values(in, source);
    Entries e(std::move(kv), source);
    const std::string name = e.text_or("name", "");
    AFamily a = read_a(e);
    const BFamily b1 = read_b(e, "b1");
    const BFamily b2 = read_b(e, "b2");
    const bool symmetrize = read_bool(e, "b.symmetrize");

    const std::string yfam = e.text("y.family");
    YFamily y;
    if (yfam == "constant") {
        y = ConstantY{e.number("y.c")};
    } else if (yfam == "gaussian") {
        y = GaussianY{e.number("y.mean"), e.number("y.var")};
    } else if (yfam == "affine_log_a") {
        const double lambda = e.number("y.lambda");
        const std::string offset = e.text("y.offset");
        double off = 0.0;
        if (offset == "rho") {
            // Centre y under the tilted law: offset = E a^alpha log a.
            const CoefficientLaw probe(a, ConstantY{0.0}, b1, b2, symmetrize);
            const double alpha = solve_alpha(probe);
            off = mellin_log(probe, alpha).value;
        } else {
            off = e.parse_number("y.offset", offset);
        }
        y = AffineInLogA{lambda, off};
    } else {
        throw ConfigError(source + ": unknown y.family '" + yfam + "'");
    }
    e.reject_unused();

    try {
        return ModelConfig{name, CoefficientLaw(std::move(a), y, b1, b2, symmetrize)};
    } catch (const ParameterError& err) {
        throw ConfigError(source + ": " + err.what());
    }
}

ModelConfig parse_model_string(const std::string& text) {
    std::istringstream in(text);
    return parse_model(in, "<string>");
}

ModelConfig load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file '" + path.string() + "'");
    return parse_model(in, path.string());
}

std::string to_config(const CoefficientLaw& law, const std::string& name) {
    std::ostringstream os;
    if (!name.empty()) os << "name=" << name << "\n";
    const auto& a = law.a_family();
    if (const auto* f = std::get_if<LogNormalA>(&a)) {
        os << "a.family=lognormal\na.mu=" << num(f->mu) << "\na.sigma2=" << num(f->sigma2) << "\n";
    } else if (const auto* f = std::get_if<ConstantA>(&a)) {
        os << "a.family=constant\na.c=" << num(f->c) << "\n";
    } else if (const auto* f = std::get_if<DiscreteA>(&a)) {
        os << "a.family=discrete\na.values=";
        for (std::size_t i = 0; i < f->values.size(); ++i) os << (i ? "," : "") << num(f->values[i]);
        os << "\na.probs=";
        for (std::size_t i = 0; i < f->probs.size(); ++i) os << (i ? "," : "") << num(f->probs[i]);
        os << "\n";
    } else if (const auto* f = std::get_if<ShiftedSquareA>(&a)) {
        os << "a.family=shifted_square\na.lambda=" << num(f->lambda) << "\na.shift=" << num(f->shift) << "\n";
    } else {
        throw ConfigError("custom a families cannot be written to a model file");
    }
    const auto& y = law.y_family();
    if (const auto* f = std::get_if<ConstantY>(&y)) {
        os << "y.family=constant\ny.c=" << num(f->c) << "\n";
    } else if (const auto* f = std::get_if<GaussianY>(&y)) {
        os << "y.family=gaussian\ny.mean=" << num(f->mean) << "\ny.var=" << num(f->var) << "\n";
    } else {
        const auto& g = std::get<AffineInLogA>(y);
        os << "y.family=affine_log_a\ny.lambda=" << num(g.lambda) << "\ny.offset=" << num(g.offset) << "\n";
    }
    write_b(os, "b1", law.b1_family());
    write_b(os, "b2", law.b2_family());
    if (law.symmetrize_b()) os << "b.symmetrize=true\n";
    return os.str();
}

}  // namespace tripert
