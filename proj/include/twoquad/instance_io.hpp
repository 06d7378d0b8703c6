#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twoquad/matrix.hpp"
#include "twoquad/rational.hpp"

namespace twoquad {

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// A pair of forms as read from disk, with free-form key/value metadata.
struct Instance {
    SymMatrix q0;
    SymMatrix q1;
    Metadata metadata;

    std::size_t n() const { return q0.n(); }
    friend bool operator==(const Instance&, const Instance&) = default;
};

/// Solution vector and residues as stored on disk.
struct CertificateFile {
    RatVec x;
    Rat residue0;
    Rat residue1;
    std::string digest;
};

namespace detail {

struct Token {
    std::string_view text;
    std::size_t column;
};

inline std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i > start) {
            out.push_back({line.substr(start, i - start), start + 1});
        }
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

inline bool valid_metadata_key(std::string_view key) {
    if (key.empty()) {
        return false;
    }
    for (char c : key) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') {
            return false;
        }
    }
    return true;
}

/// "# key: value" comment lines become metadata; other comments are dropped.
inline bool parse_metadata_line(std::string_view comment, std::pair<std::string, std::string>& out) {
    std::string_view body = trim(comment);
    std::size_t colon = body.find(':');
    if (colon == std::string_view::npos) {
        return false;
    }
    std::string_view key = trim(body.substr(0, colon));
    if (!valid_metadata_key(key)) {
        return false;
    }
    out = {std::string(key), std::string(trim(body.substr(colon + 1)))};
    return true;
}

inline Rat parse_entry(const Token& tok, std::size_t line) {
    Rat r;
    if (!try_parse_rat(tok.text, r)) {
        std::size_t slash = tok.text.find('/');
        std::string_view den = slash == std::string_view::npos ? std::string_view{} : tok.text.substr(slash + 1);
        if (!den.empty() && den.find_first_not_of('0') == std::string_view::npos) {
            throw ParseError("zero denominator in '" + std::string(tok.text) + "'", line, tok.column);
        }
        throw ParseError("malformed rational '" + std::string(tok.text) + "'", line, tok.column);
    }
    return r;
}

inline std::pair<std::size_t, std::size_t> offset_to_line_column(std::string_view text, std::size_t offset) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

inline void check_metadata_for_emit(const Metadata& md) {
    for (const auto& [key, value] : md) {
        if (!valid_metadata_key(key) || value.find('\n') != std::string::npos ||
            value.find('\r') != std::string::npos || trim(value) != value) {
            throw PreconditionViolation("metadata entry '" + key + "' cannot be written");
        }
    }
}

}  // namespace detail

/// Plain instance format: optional "# key: value" lines, then n, the n rows of Q0 and the n rows
/// of Q1, one row per line. Entries are integers or p/q. Blank lines and '#' comments are ignored.
inline Instance parse_instance(std::string_view text) {
    Instance inst;
    std::size_t n = 0;
    bool have_n = false;
    std::size_t rows_done = 0;
    RatMatrix m[2];
    // Position of each entry, for symmetry errors.
    std::vector<std::pair<std::size_t, std::size_t>> where;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    auto check_symmetric = [&](int which) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (m[which](i, j) != m[which](j, i)) {
                    auto [l, c] = where[(static_cast<std::size_t>(which) * n + i) * n + j];
                    throw ParseError("Q" + std::to_string(which) + " is not symmetric: entry (" + std::to_string(i + 1) +
                                         "," + std::to_string(j + 1) + ") differs from (" + std::to_string(j + 1) +
                                         "," + std::to_string(i + 1) + ")",
                                     l, c);
                }
            }
        }
    };

    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        ++line_no;
        pos = end + 1;

        std::size_t hash = line.find('#');
        std::string_view content = line.substr(0, hash);
        std::vector<detail::Token> toks = detail::tokenize(content);
        if (toks.empty()) {
            std::pair<std::string, std::string> kv;
            if (hash != std::string_view::npos && !have_n && detail::parse_metadata_line(line.substr(hash + 1), kv)) {
                inst.metadata.push_back(std::move(kv));
            }
            if (end == text.size()) {
                break;
            }
            continue;
        }
        if (!have_n) {
            if (toks.size() != 1) {
                throw ParseError("expected the dimension alone on its line", line_no, toks[1].column);
            }
            Rat v;
            if (!try_parse_rat(toks[0].text, v) || v.get_den() != 1 || sgn(v) <= 0 || !v.get_num().fits_ulong_p()) {
                throw ParseError("dimension must be a positive integer, got '" + std::string(toks[0].text) + "'",
                                 line_no, toks[0].column);
            }
            n = v.get_num().get_ui();
            have_n = true;
            m[0] = RatMatrix(n, n);
            m[1] = RatMatrix(n, n);
            where.assign(2 * n * n, {0, 0});
        } else if (rows_done < 2 * n) {
            const int which = rows_done < n ? 0 : 1;
            const std::size_t i = rows_done % n;
            if (toks.size() < n) {
                throw ParseError("row " + std::to_string(i + 1) + " of Q" + std::to_string(which) + " has " +
                                     std::to_string(toks.size()) + " entries, expected " + std::to_string(n),
                                 line_no, content.size() + 1);
            }
            if (toks.size() > n) {
                throw ParseError("row " + std::to_string(i + 1) + " of Q" + std::to_string(which) + " has more than " +
                                     std::to_string(n) + " entries",
                                 line_no, toks[n].column);
            }
            for (std::size_t j = 0; j < n; ++j) {
                m[which](i, j) = detail::parse_entry(toks[j], line_no);
                where[(static_cast<std::size_t>(which) * n + i) * n + j] = {line_no, toks[j].column};
            }
            ++rows_done;
            if (rows_done == n) {
                check_symmetric(0);
            } else if (rows_done == 2 * n) {
                check_symmetric(1);
            }
        } else {
            throw ParseError("unexpected content after the last row of Q1", line_no, toks[0].column);
        }
        if (end == text.size()) {
            break;
        }
    }
    if (!have_n) {
        throw ParseError("missing dimension", line_no, 1);
    }
    if (rows_done < 2 * n) {
        const int which = rows_done < n ? 0 : 1;
        throw ParseError("unexpected end of input, expected row " + std::to_string(rows_done % n + 1) + " of Q" +
                             std::to_string(which),
                         line_no, 1);
    }
    inst.q0 = SymMatrix(std::move(m[0]));
    inst.q1 = SymMatrix(std::move(m[1]));
    return inst;
}

/// Canonical plain text. parse_instance(emit_instance(x)) == x, and emitting again gives the same bytes.
inline std::string emit_instance(const Instance& inst) {
    detail::check_metadata_for_emit(inst.metadata);
    if (inst.q1.n() != inst.q0.n()) {
        throw DimensionMismatch("forms of different sizes");
    }
    std::ostringstream os;
    for (const auto& [key, value] : inst.metadata) {
        os << "# " << key << ": " << value << '\n';
    }
    const std::size_t n = inst.n();
    os << n << '\n';
    for (const SymMatrix* q : {&inst.q0, &inst.q1}) {
        if (q == &inst.q1) {
            os << '\n';
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j > 0) {
                    os << ' ';
                }
                os << (*q)(i, j).get_str();
            }
            os << '\n';
        }
    }
    return os.str();
}

namespace detail {

inline nlohmann::ordered_json parse_json_document(std::string_view text) {
    try {
        return nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [l, c] = offset_to_line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string what = e.what();
        // Drop the library's own "[json.exception.parse_error.101] parse error at line x, column y: " prefix.
        if (std::size_t colon = what.find(": "); colon != std::string::npos) {
            what = what.substr(colon + 2);
        }
        throw ParseError(what, l, c);
    }
}

inline Rat json_rat(const nlohmann::ordered_json& v, const std::string& path) {
    Rat r;
    if (v.is_number_integer()) {
        return Rat(Int(v.dump()));
    }
    if (!v.is_string() || !try_parse_rat(v.get<std::string>(), r)) {
        throw ParseError(path + ": expected an integer or a \"p/q\" string", 1, 1);
    }
    return r;
}

inline RatMatrix json_grid(const nlohmann::ordered_json& doc, const char* key, std::size_t n) {
    const std::string k(key);
    if (!doc.contains(k) || !doc[k].is_array() || doc[k].size() != n) {
        throw ParseError(k + ": expected an array of " + std::to_string(n) + " rows", 1, 1);
    }
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const nlohmann::ordered_json& row = doc[k][i];
        const std::string rp = k + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != n) {
            throw ParseError(rp + ": expected " + std::to_string(n) + " entries", 1, 1);
        }
        for (std::size_t j = 0; j < n; ++j) {
            m(i, j) = json_rat(row[j], rp + "[" + std::to_string(j) + "]");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (m(i, j) != m(j, i)) {
                throw ParseError(k + " is not symmetric at [" + std::to_string(i) + "][" + std::to_string(j) + "]", 1,
                                 1);
            }
        }
    }
    return m;
}

inline nlohmann::ordered_json json_grid_out(const SymMatrix& q) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < q.n(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < q.n(); ++j) {
            row.push_back(q(i, j).get_str());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::size_t json_dimension(const nlohmann::ordered_json& doc) {
    if (!doc.is_object()) {
        throw ParseError("expected a JSON object", 1, 1);
    }
    if (!doc.contains("n") || !doc["n"].is_number_unsigned() || doc["n"].get<std::uint64_t>() == 0) {
        throw ParseError("n: expected a positive integer", 1, 1);
    }
    return doc["n"].get<std::size_t>();
}

}  // namespace detail

/// JSON alternative: {"n": .., "metadata": {..}, "q0": [[..]], "q1": [[..]]} with entries as strings
/// (integers are accepted on input). Structural errors name the offending JSON path.
inline Instance parse_instance_json(std::string_view text) {
    nlohmann::ordered_json doc = detail::parse_json_document(text);
    const std::size_t n = detail::json_dimension(doc);
    Instance inst;
    inst.q0 = SymMatrix(detail::json_grid(doc, "q0", n));
    inst.q1 = SymMatrix(detail::json_grid(doc, "q1", n));
    if (doc.contains("metadata")) {
        const nlohmann::ordered_json& md = doc["metadata"];
        if (!md.is_object()) {
            throw ParseError("metadata: expected an object", 1, 1);
        }
        for (auto it = md.begin(); it != md.end(); ++it) {
            if (!it.value().is_string()) {
                throw ParseError("metadata." + it.key() + ": expected a string", 1, 1);
            }
            inst.metadata.emplace_back(it.key(), it.value().get<std::string>());
        }
    }
    return inst;
}

inline std::string emit_instance_json(const Instance& inst) {
    detail::check_metadata_for_emit(inst.metadata);
    nlohmann::ordered_json doc;
    doc["n"] = inst.n();
    if (!inst.metadata.empty()) {
        nlohmann::ordered_json md = nlohmann::ordered_json::object();
        for (const auto& [key, value] : inst.metadata) {
            if (md.contains(key)) {
                throw PreconditionViolation("duplicate metadata key '" + key + "'");
            }
            md[key] = value;
        }
        doc["metadata"] = std::move(md);
    }
    doc["q0"] = detail::json_grid_out(inst.q0);
    doc["q1"] = detail::json_grid_out(inst.q1);
    return doc.dump(1) + "\n";
}

inline bool looks_like_json(std::string_view text) {
    std::string_view t = detail::trim(text);
    return !t.empty() && t.front() == '{';
}

/// Plain or JSON instance, chosen by the first non-blank character.
inline Instance parse_instance_any(std::string_view text) {
    return looks_like_json(text) ? parse_instance_json(text) : parse_instance(text);
}

/// Plain certificate: "n", "x", "residue0", "residue1" and "digest" lines, '#' comments allowed.
inline std::string emit_certificate(const CertificateFile& c) {
    std::ostringstream os;
    os << "# twoquad certificate\n";
    os << "n " << c.x.size() << '\n';
    os << 'x';
    for (const Rat& v : c.x) {
        os << ' ' << v.get_str();
    }
    os << '\n';
    os << "residue0 " << c.residue0.get_str() << '\n';
    os << "residue1 " << c.residue1.get_str() << '\n';
    os << "digest " << c.digest << '\n';
    return os.str();
}

inline CertificateFile parse_certificate(std::string_view text) {
    CertificateFile c;
    bool have[5] = {false, false, false, false, false};
    std::size_t n = 0;
    std::size_t n_line = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        std::vector<detail::Token> toks = detail::tokenize(line.substr(0, line.find('#')));
        if (!toks.empty()) {
            const std::string_view key = toks[0].text;
            auto one_value = [&]() -> const detail::Token& {
                if (toks.size() != 2) {
                    throw ParseError("expected one value after '" + std::string(key) + "'", line_no,
                                     toks.size() < 2 ? line.size() + 1 : toks[2].column);
                }
                return toks[1];
            };
            int slot = -1;
            if (key == "n") {
                slot = 0;
                const detail::Token& t = one_value();
                Rat v;
                if (!try_parse_rat(t.text, v) || v.get_den() != 1 || sgn(v) <= 0 || !v.get_num().fits_ulong_p()) {
                    throw ParseError("n must be a positive integer", line_no, t.column);
                }
                n = v.get_num().get_ui();
                n_line = line_no;
            } else if (key == "x") {
                slot = 1;
                for (std::size_t i = 1; i < toks.size(); ++i) {
                    c.x.push_back(detail::parse_entry(toks[i], line_no));
                }
            } else if (key == "residue0") {
                slot = 2;
                c.residue0 = detail::parse_entry(one_value(), line_no);
            } else if (key == "residue1") {
                slot = 3;
                c.residue1 = detail::parse_entry(one_value(), line_no);
            } else if (key == "digest") {
                slot = 4;
                c.digest = std::string(one_value().text);
            } else {
                throw ParseError("unknown certificate field '" + std::string(key) + "'", line_no, toks[0].column);
            }
            if (have[slot]) {
                throw ParseError("duplicate certificate field '" + std::string(key) + "'", line_no, toks[0].column);
            }
            have[slot] = true;
        }
        if (end == text.size()) {
            break;
        }
    }
    static const char* names[5] = {"n", "x", "residue0", "residue1", "digest"};
    for (int i = 0; i < 5; ++i) {
        if (!have[i]) {
            throw ParseError(std::string("missing certificate field '") + names[i] + "'", line_no, 1);
        }
    }
    if (c.x.size() != n) {
        throw ParseError("x has " + std::to_string(c.x.size()) + " entries but n = " + std::to_string(n), n_line, 1);
    }
    return c;
}

inline std::string emit_certificate_json(const CertificateFile& c) {
    nlohmann::ordered_json doc;
    doc["n"] = c.x.size();
    nlohmann::ordered_json x = nlohmann::ordered_json::array();
    for (const Rat& v : c.x) {
        x.push_back(v.get_str());
    }
    doc["x"] = std::move(x);
    doc["residue0"] = c.residue0.get_str();
    doc["residue1"] = c.residue1.get_str();
    doc["digest"] = c.digest;
    return doc.dump(1) + "\n";
}

inline CertificateFile parse_certificate_json(std::string_view text) {
    nlohmann::ordered_json doc = detail::parse_json_document(text);
    const std::size_t n = detail::json_dimension(doc);
    CertificateFile c;
    if (!doc.contains("x") || !doc["x"].is_array() || doc["x"].size() != n) {
        throw ParseError("x: expected an array of " + std::to_string(n) + " entries", 1, 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
        c.x.push_back(detail::json_rat(doc["x"][i], "x[" + std::to_string(i) + "]"));
    }
    for (const char* key : {"residue0", "residue1"}) {
        if (!doc.contains(key)) {
            throw ParseError(std::string(key) + ": missing", 1, 1);
        }
    }
    c.residue0 = detail::json_rat(doc["residue0"], "residue0");
    c.residue1 = detail::json_rat(doc["residue1"], "residue1");
    if (!doc.contains("digest") || !doc["digest"].is_string()) {
        throw ParseError("digest: expected a string", 1, 1);
    }
    c.digest = doc["digest"].get<std::string>();
    return c;
}

inline CertificateFile parse_certificate_any(std::string_view text) {
    return looks_like_json(text) ? parse_certificate_json(text) : parse_certificate(text);
}

}  // namespace twoquad
