#include "a2c/persistence.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "a2c/error.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "model-file";

using Body = std::map<std::string, std::string>;

std::string crc_hex(std::string_view body) {
    const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()));
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
    return buf;
}

std::string frame(std::string_view kind, const Body& body) {
    std::string text;
    for (const auto& [k, v] : body) text += k + " = " + v + "\n";
    std::string out(kModelMagic);
    out += "\nkind = ";
    out += kind;
    out += "\nchecksum = " + crc_hex(text) + "\n" + text;
    return out;
}

std::string u(std::size_t v) { return std::to_string(v); }

class Reader {
public:
    Reader(Body body, std::string source) : body_(std::move(body)), source_(std::move(source)) {}

    const std::string& raw(const std::string& key) const {
        auto it = body_.find(key);
        if (it == body_.end()) throw CorruptionError(kStage, source_ + ": missing key '" + key + "'");
        return it->second;
    }
    std::size_t size(const std::string& key) const {
        auto v = text::parse_uint(raw(key));
        if (!v) throw CorruptionError(kStage, source_ + ": key '" + key + "' is not an unsigned integer");
        return static_cast<std::size_t>(*v);
    }
    double real(const std::string& key) const {
        auto v = text::parse_double(raw(key));
        if (!v) throw CorruptionError(kStage, source_ + ": key '" + key + "' is not a number");
        return *v;
    }
    std::vector<double> reals(const std::string& key, std::size_t expected) const {
        std::vector<double> v;
        try {
            v = text::parse_doubles(raw(key));
        } catch (const std::exception&) {
            throw CorruptionError(kStage, source_ + ": key '" + key + "' holds a malformed vector");
        }
        if (v.size() != expected) {
            throw CorruptionError(kStage, source_ + ": key '" + key + "' has " + u(v.size()) + " values, expected " +
                                              u(expected));
        }
        return v;
    }
    const std::string& source() const { return source_; }

private:
    Body body_;
    std::string source_;
};

RejectorModel read_rejector(const Reader& r) {
    RejectorModel m;
    try {
        m.kind = parse_scorer_kind(r.raw("scorer"));
    } catch (const UsageError&) {
        throw VersionError(kStage, r.source() + ": unknown scorer '" + r.raw("scorer") + "'");
    }
    m.dimension = r.size("dimension");
    m.k = r.size("k");
    m.components = r.size("components");
    m.calibration_quantile = r.real("calibration_quantile");
    const auto refs = r.size("reference_count");
    m.center = r.reals("center", r.size("center_size"));
    m.reference = r.reals("reference", refs * m.dimension);
    m.basis = r.reals("basis", m.components * m.dimension);
    if (r.raw("theta_r") != "none") m.theta_r = r.real("theta_r");
    return m;
}

ClassifierModel read_classifier(const Reader& r) {
    ClassifierModel m;
    try {
        m.kind = parse_classifier_kind(r.raw("architecture"));
    } catch (const UsageError&) {
        throw VersionError(kStage, r.source() + ": unknown architecture '" + r.raw("architecture") + "'");
    }
    m.dimension = r.size("dimension");
    m.hidden = r.size("hidden");
    const auto n = r.size("class_count");
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = "class." + u(i);
        m.class_set.push_back({static_cast<ClassId>(r.size(p + ".id")), r.raw(p + ".name")});
    }
    const auto in = m.kind == ClassifierKind::OneHiddenLayer ? m.hidden : m.dimension;
    if (m.kind == ClassifierKind::OneHiddenLayer) {
        m.hidden_weights = r.reals("hidden_weights", m.hidden * m.dimension);
        m.hidden_bias = r.reals("hidden_bias", m.hidden);
    }
    m.output_weights = r.reals("output_weights", n * in);
    m.output_bias = r.reals("output_bias", n);
    m.meta.epochs = r.size("meta.epochs");
    m.meta.learning_rate = r.real("meta.learning_rate");
    m.meta.seed = r.size("meta.seed");
    m.meta.final_loss = r.real("meta.final_loss");
    m.meta.loss_curve = r.reals("meta.loss_curve", r.size("meta.loss_curve_size"));
    return m;
}

}  // namespace

std::string serialize_model(const RejectorModel& m) {
    Body b;
    b["scorer"] = scorer_name(m.kind);
    b["dimension"] = u(m.dimension);
    b["k"] = u(m.k);
    b["components"] = u(m.components);
    b["calibration_quantile"] = text::format_double(m.calibration_quantile);
    b["reference_count"] = u(m.reference_count());
    b["center"] = text::format_doubles(m.center);
    b["center_size"] = u(m.center.size());
    b["reference"] = text::format_doubles(m.reference);
    b["basis"] = text::format_doubles(m.basis);
    b["theta_r"] = m.theta_r ? text::format_double(*m.theta_r) : "none";
    return frame("rejector", b);
}

std::string serialize_model(const ClassifierModel& m) {
    Body b;
    b["architecture"] = classifier_kind_name(m.kind);
    b["dimension"] = u(m.dimension);
    b["hidden"] = u(m.hidden);
    b["class_count"] = u(m.class_set.size());
    for (std::size_t i = 0; i < m.class_set.size(); ++i) {
        b["class." + u(i) + ".id"] = u(m.class_set[i].id);
        b["class." + u(i) + ".name"] = m.class_set[i].name;
    }
    if (m.kind == ClassifierKind::OneHiddenLayer) {
        b["hidden_weights"] = text::format_doubles(m.hidden_weights);
        b["hidden_bias"] = text::format_doubles(m.hidden_bias);
    }
    b["output_weights"] = text::format_doubles(m.output_weights);
    b["output_bias"] = text::format_doubles(m.output_bias);
    b["meta.epochs"] = u(m.meta.epochs);
    b["meta.learning_rate"] = text::format_double(m.meta.learning_rate);
    b["meta.seed"] = std::to_string(m.meta.seed);
    b["meta.final_loss"] = text::format_double(m.meta.final_loss);
    b["meta.loss_curve"] = text::format_doubles(m.meta.loss_curve);
    b["meta.loss_curve_size"] = u(m.meta.loss_curve.size());
    return frame("classifier", b);
}

AnyModel parse_model(std::string_view content, std::string_view source_view) {
    const std::string source(source_view);
    if (content.size() < kModelMagic.size() + 1) throw CorruptionError(kStage, source + ": file is truncated");
    const auto magic = content.substr(0, kModelMagic.size());
    if (magic != kModelMagic) {
        if (magic.substr(0, 7) == kModelMagic.substr(0, 7)) {
            throw VersionError(kStage, source + ": unsupported model format version '" + std::string(magic) + "'");
        }
        throw CorruptionError(kStage, source + ": not a model file (bad magic)");
    }
    content.remove_prefix(kModelMagic.size());
    if (content.front() != '\n') throw CorruptionError(kStage, source + ": malformed header");
    content.remove_prefix(1);

    auto header_line = [&](std::string_view key) {
        const auto nl = content.find('\n');
        if (nl == std::string_view::npos) throw CorruptionError(kStage, source + ": file is truncated");
        const auto line = content.substr(0, nl);
        content.remove_prefix(nl + 1);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos || text::trim(line.substr(0, eq)) != key) {
            throw CorruptionError(kStage, source + ": expected header '" + std::string(key) + "'");
        }
        return std::string(text::trim(line.substr(eq + 1)));
    };
    const auto kind = header_line("kind");
    const auto checksum = header_line("checksum");
    if (crc_hex(content) != checksum) {
        throw CorruptionError(kStage, source + ": checksum mismatch (file truncated or modified)");
    }
    if (kind != "rejector" && kind != "classifier") {
        throw VersionError(kStage, source + ": unknown model kind '" + kind + "'");
    }

    Body body;
    std::size_t line_no = 3;
    while (!content.empty()) {
        ++line_no;
        const auto nl = content.find('\n');
        if (nl == std::string_view::npos) throw CorruptionError(kStage, source + ": last line lacks LF");
        const auto line = content.substr(0, nl);
        content.remove_prefix(nl + 1);
        const auto eq = line.find(" = ");
        if (eq == std::string_view::npos) {
            throw CorruptionError(kStage, source + ":" + u(line_no) + ": expected 'key = value'");
        }
        body[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 3));
    }
    Reader reader(std::move(body), source);
    if (kind == "rejector") return read_rejector(reader);
    return read_classifier(reader);
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io", "cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("io", "write failed for " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("io", "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_model(const RejectorModel& model, const std::filesystem::path& path) {
    write_text_file(path, serialize_model(model));
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    write_text_file(path, serialize_model(model));
}

AnyModel load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path), path.string()); }

RejectorModel load_rejector(const std::filesystem::path& path) {
    auto m = load_model(path);
    if (auto* r = std::get_if<RejectorModel>(&m)) return std::move(*r);
    throw UsageError(kStage, path.string() + " holds a classifier, not a rejector");
}

ClassifierModel load_classifier(const std::filesystem::path& path) {
    auto m = load_model(path);
    if (auto* c = std::get_if<ClassifierModel>(&m)) return std::move(*c);
    throw UsageError(kStage, path.string() + " holds a rejector, not a classifier");
}

}  // namespace a2c
