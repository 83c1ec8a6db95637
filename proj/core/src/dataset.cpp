#include "cforge/dataset.hpp"

#include <json.hpp>

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>

#include "cforge/lucas.hpp"
#include "cforge/version.hpp"

namespace cforge {

namespace {

using json = nlohmann::ordered_json;

std::string where(const std::optional<std::size_t>& idx, const std::string& field) {
    if (idx) return "record " + std::to_string(*idx) + ", field '" + field + "'";
    return "field '" + field + "'";
}

// record-level aliases the compat loader maps onto the canonical names
const std::map<std::string, std::string>& record_aliases() {
    static const std::map<std::string, std::string> a = {
        {"residues", "residues_mod35"}, {"mr_pass", "mr_passed"},
        {"first_fail", "mr_first_fail"}, {"bits", "n_bits"},
        {"lucas_measurement", "lucas"},
    };
    return a;
}

const std::map<std::string, std::string>& meta_aliases() {
    static const std::map<std::string, std::string> a = {
        {"version", "format_version"}, {"created", "created_utc"},
        {"params", "params_grid"},
    };
    return a;
}

const std::map<std::string, std::string>& lucas_aliases() {
    static const std::map<std::string, std::string> a = {
        {"u", "u_residue"}, {"u_bits", "u_residue_bits"},
        {"pass", "strong_lucas_pass"}, {"pseudoprime", "lucas_pseudoprime"},
    };
    return a;
}

struct FieldCtx {
    std::optional<std::size_t> idx;
};

[[noreturn]] void fail(const FieldCtx& ctx, const std::string& field,
                       const std::string& msg) {
    throw DatasetError(field, ctx.idx, msg);
}

const json& require(const json& obj, const char* key, const FieldCtx& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(ctx, key, "missing required field");
    return *it;
}

std::int64_t get_int(const json& v, const char* key, const FieldCtx& ctx) {
    if (!v.is_number_integer())
        fail(ctx, key, v.is_number_float()
                           ? "integer field overflows its declared width or is fractional"
                           : "expected an integer");
    return v.get<std::int64_t>();
}

std::uint64_t get_uint(const json& v, const char* key, const FieldCtx& ctx) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        auto s = v.get<std::int64_t>();
        if (s < 0) fail(ctx, key, "expected a non-negative integer");
        return static_cast<std::uint64_t>(s);
    }
    fail(ctx, key, v.is_number_float()
                       ? "integer field overflows its declared width or is fractional"
                       : "expected an integer");
}

bool get_bool(const json& v, const char* key, const FieldCtx& ctx) {
    if (!v.is_boolean()) fail(ctx, key, "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& v, const char* key, const FieldCtx& ctx) {
    if (!v.is_string()) fail(ctx, key, "expected a string");
    return v.get<std::string>();
}

BigInt get_bigint(const json& v, const char* key, const FieldCtx& ctx) {
    std::string s = get_string(v, key, ctx);
    if (s.empty()) fail(ctx, key, "empty big-int string");
    for (char c : s)
        if (c < '0' || c > '9') fail(ctx, key, "non-decimal big-int string");
    BigInt out;
    if (mpz_set_str(out.get_mpz_t(), s.c_str(), 10) != 0)
        fail(ctx, key, "non-decimal big-int string");
    return out;
}

json bigint_to_json(const BigInt& x) { return json(x.get_str()); }

json measurement_to_json(const CollapseMeasurement& m) {
    json j = json::object();
    j["D"] = m.D ? json(*m.D) : json(nullptr);
    j["d_bits"] = m.d_bits ? json(*m.d_bits) : json(nullptr);
    j["s"] = m.s ? json(*m.s) : json(nullptr);
    j["u_residue"] = m.u_residue ? bigint_to_json(*m.u_residue) : json(nullptr);
    j["u_residue_bits"] = m.u_residue_bits ? json(*m.u_residue_bits) : json(nullptr);
    j["n_bits"] = m.n_bits;
    j["delta"] = m.delta ? json(*m.delta) : json(nullptr);
    j["strong_lucas_pass"] = m.strong_lucas_pass;
    j["lucas_pseudoprime"] = m.lucas_pseudoprime;
    j["v_zero_round"] = m.v_zero_round ? json(*m.v_zero_round) : json(nullptr);
    j["gcd_shortcut"] = m.gcd_shortcut ? bigint_to_json(*m.gcd_shortcut) : json(nullptr);
    return j;
}

json record_to_json(const CompositeRecord& r,
                    const std::map<std::string, std::string>* extra) {
    json j = json::object();
    j["p1"] = bigint_to_json(r.p1);
    j["p2"] = bigint_to_json(r.p2);
    j["p3"] = bigint_to_json(r.p3);
    j["n"] = bigint_to_json(r.n);
    j["k"] = r.k;
    j["M"] = r.M;
    j["n_bits"] = r.n_bits;
    j["residues_mod35"] = r.residues_mod35;
    j["mr_passed"] = r.mr_passed;
    j["mr_first_fail"] = r.mr_first_fail ? json(*r.mr_first_fail) : json(nullptr);
    j["lucas"] = r.lucas ? measurement_to_json(*r.lucas) : json(nullptr);
    if (extra)
        for (const auto& [k, raw] : *extra) j[k] = json::parse(raw);
    return j;
}

// canonicalizes keys in place: maps aliases, splits off unknowns
void sift_fields(json& obj, const std::map<std::string, std::string>& aliases,
                 const std::set<std::string>& known, LoadMode mode, const FieldCtx& ctx,
                 const std::string& scope, std::map<std::string, std::string>& extra,
                 std::vector<std::string>& warnings) {
    json clean = json::object();
    for (auto& [key, val] : obj.items()) {
        std::string name = key;
        auto al = aliases.find(key);
        if (al != aliases.end() && mode == LoadMode::Compat) {
            name = al->second;
            warnings.push_back(scope + ": mapped alias '" + key + "' to '" + name + "'");
        }
        if (known.count(name)) {
            if (clean.contains(name)) fail(ctx, name, "duplicate field after alias mapping");
            clean[name] = std::move(val);
        } else if (mode == LoadMode::Strict) {
            fail(ctx, key, "unknown field (strict mode)");
        } else {
            extra[key] = val.dump();
            warnings.push_back(scope + ": kept unknown field '" + key + "'");
        }
    }
    obj = std::move(clean);
}

CollapseMeasurement measurement_from_json(json j, LoadMode mode, const FieldCtx& ctx,
                                          std::map<std::string, std::string>& extra,
                                          std::vector<std::string>& warnings) {
    static const std::set<std::string> known = {
        "D", "d_bits", "s", "u_residue", "u_residue_bits", "n_bits",
        "delta", "strong_lucas_pass", "lucas_pseudoprime", "v_zero_round", "gcd_shortcut"};
    if (!j.is_object()) fail(ctx, "lucas", "expected an object or null");
    std::string scope = ctx.idx ? "record " + std::to_string(*ctx.idx) + " lucas" : "lucas";
    sift_fields(j, lucas_aliases(), known, mode, ctx, scope, extra, warnings);

    CollapseMeasurement m;
    auto opt = [&](const char* key) -> const json* {
        auto it = j.find(key);
        return (it == j.end() || it->is_null()) ? nullptr : &*it;
    };
    if (auto* v = opt("D")) m.D = get_int(*v, "D", ctx);
    if (auto* v = opt("d_bits")) m.d_bits = static_cast<int>(get_int(*v, "d_bits", ctx));
    if (auto* v = opt("s")) m.s = static_cast<unsigned long>(get_uint(*v, "s", ctx));
    if (auto* v = opt("u_residue")) m.u_residue = get_bigint(*v, "u_residue", ctx);
    if (auto* v = opt("u_residue_bits"))
        m.u_residue_bits = static_cast<int>(get_int(*v, "u_residue_bits", ctx));
    m.n_bits = static_cast<int>(get_int(require(j, "n_bits", ctx), "n_bits", ctx));
    if (auto* v = opt("delta")) m.delta = static_cast<int>(get_int(*v, "delta", ctx));
    m.strong_lucas_pass =
        get_bool(require(j, "strong_lucas_pass", ctx), "strong_lucas_pass", ctx);
    m.lucas_pseudoprime =
        get_bool(require(j, "lucas_pseudoprime", ctx), "lucas_pseudoprime", ctx);
    if (auto* v = opt("v_zero_round"))
        m.v_zero_round = static_cast<unsigned long>(get_uint(*v, "v_zero_round", ctx));
    if (auto* v = opt("gcd_shortcut")) m.gcd_shortcut = get_bigint(*v, "gcd_shortcut", ctx);
    return m;
}

CompositeRecord record_from_json(json j, LoadMode mode, std::size_t idx,
                                 std::map<std::string, std::string>& extra,
                                 std::vector<std::string>& warnings) {
    FieldCtx ctx{idx};
    static const std::set<std::string> known = {
        "p1", "p2", "p3", "n", "k", "M", "n_bits",
        "residues_mod35", "mr_passed", "mr_first_fail", "lucas"};
    if (!j.is_object()) fail(ctx, "record", "expected an object");
    sift_fields(j, record_aliases(), known, mode, ctx, "record " + std::to_string(idx),
                extra, warnings);

    CompositeRecord r;
    r.p1 = get_bigint(require(j, "p1", ctx), "p1", ctx);
    r.p2 = get_bigint(require(j, "p2", ctx), "p2", ctx);
    r.p3 = get_bigint(require(j, "p3", ctx), "p3", ctx);
    r.n = get_bigint(require(j, "n", ctx), "n", ctx);
    r.k = get_int(require(j, "k", ctx), "k", ctx);
    r.M = get_int(require(j, "M", ctx), "M", ctx);
    r.n_bits = static_cast<int>(get_int(require(j, "n_bits", ctx), "n_bits", ctx));

    const json& res = require(j, "residues_mod35", ctx);
    if (!res.is_array() || res.size() != 3)
        fail(ctx, "residues_mod35", "expected an array of three integers");
    for (const auto& v : res)
        r.residues_mod35.push_back(static_cast<int>(get_int(v, "residues_mod35", ctx)));

    const json& mrp = require(j, "mr_passed", ctx);
    if (!mrp.is_array()) fail(ctx, "mr_passed", "expected an array of integers");
    for (const auto& v : mrp)
        r.mr_passed.push_back(static_cast<int>(get_int(v, "mr_passed", ctx)));

    const json& ff = require(j, "mr_first_fail", ctx);
    if (!ff.is_null()) r.mr_first_fail = static_cast<int>(get_int(ff, "mr_first_fail", ctx));

    const json& lj = require(j, "lucas", ctx);
    if (!lj.is_null()) r.lucas = measurement_from_json(lj, mode, ctx, extra, warnings);
    return r;
}

void validate_record(const CompositeRecord& r, std::size_t idx) {
    FieldCtx ctx{idx};
    if (r.k < 2 || r.M < 2 || r.k == r.M)
        fail(ctx, "k", "k and M must be distinct integers >= 2");
    if (r.p1 < 5 || mpz_even_p(r.p1.get_mpz_t())) fail(ctx, "p1", "p1 must be odd and >= 5");
    BigInt h = r.p1 - 1;
    if (r.p2 != r.k * h + 1) fail(ctx, "p2", "p2 != k*(p1-1)+1");
    if (r.p3 != r.M * h + 1) fail(ctx, "p3", "p3 != M*(p1-1)+1");
    if (r.n != r.p1 * r.p2 * r.p3) fail(ctx, "n", "n != p1*p2*p3");
    if (r.n_bits != bitlen(r.n)) fail(ctx, "n_bits", "n_bits != bitlen(n)");
    if (!is_prime_oracle(r.p1)) fail(ctx, "p1", "p1 is not prime");
    if (!is_prime_oracle(r.p2)) fail(ctx, "p2", "p2 is not prime");
    if (!is_prime_oracle(r.p3)) fail(ctx, "p3", "p3 is not prime");
    BigInt nm1 = r.n - 1;
    if (!mpz_divisible_p(nm1.get_mpz_t(), BigInt(r.p1 - 1).get_mpz_t()) ||
        !mpz_divisible_p(nm1.get_mpz_t(), BigInt(r.p2 - 1).get_mpz_t()) ||
        !mpz_divisible_p(nm1.get_mpz_t(), BigInt(r.p3 - 1).get_mpz_t()))
        fail(ctx, "n", "Korselt divisibility fails; n is not Carmichael");

    if (r.residues_mod35.size() != 3 ||
        r.residues_mod35[0] != static_cast<int>(mpz_fdiv_ui(r.p1.get_mpz_t(), 35)) ||
        r.residues_mod35[1] != static_cast<int>(mpz_fdiv_ui(r.p2.get_mpz_t(), 35)) ||
        r.residues_mod35[2] != static_cast<int>(mpz_fdiv_ui(r.p3.get_mpz_t(), 35)))
        fail(ctx, "residues_mod35", "residues do not match the factors");
    for (int b : r.mr_passed)
        if (r.mr_first_fail && b == *r.mr_first_fail)
            fail(ctx, "mr_passed", "a base cannot both pass and witness");

    if (!r.lucas) return;
    const CollapseMeasurement& m = *r.lucas;
    if (m.n_bits != r.n_bits) fail(ctx, "lucas", "measurement n_bits mismatch");
    if (m.gcd_shortcut) {
        if (m.delta || m.u_residue || m.D)
            fail(ctx, "gcd_shortcut", "shortcut excludes a measured delta");
        if (*m.gcd_shortcut <= 1 || *m.gcd_shortcut >= r.n ||
            !mpz_divisible_p(r.n.get_mpz_t(), m.gcd_shortcut->get_mpz_t()))
            fail(ctx, "gcd_shortcut", "not a proper factor of n");
        return;
    }
    if (!m.D || !m.u_residue || !m.u_residue_bits || !m.delta || !m.s)
        fail(ctx, "lucas", "measurement incomplete");
    if (*m.u_residue_bits != bitlen(*m.u_residue))
        fail(ctx, "u_residue_bits", "u_residue_bits != bitlen(u_residue)");
    if (m.lucas_pseudoprime) {
        if (*m.u_residue != 0 || *m.delta != m.n_bits)
            fail(ctx, "lucas_pseudoprime", "pseudoprime sentinel requires u=0, delta=n_bits");
    } else if (*m.delta != m.n_bits - *m.u_residue_bits) {
        fail(ctx, "delta", "delta != n_bits - u_residue_bits");
    }
    if (*m.delta < 0 || *m.delta > m.n_bits) fail(ctx, "delta", "delta out of [0, n_bits]");
    if (m.v_zero_round && *m.v_zero_round >= *m.s)
        fail(ctx, "v_zero_round", "round index out of [0, s)");
    if (m.strong_lucas_pass != (m.lucas_pseudoprime || m.v_zero_round.has_value()))
        fail(ctx, "strong_lucas_pass", "pass flag contradicts U/V evidence");
}

json dataset_to_json(const DatasetFile& ds) {
    json meta = json::object();
    meta["format_version"] = ds.meta.format_version;
    meta["seed"] = ds.meta.seed;
    meta["bases"] = ds.meta.bases;
    meta["created_utc"] = ds.meta.created_utc;
    meta["params_grid"] = ds.meta.params_grid;
    for (const auto& [k, raw] : ds.meta.extra) meta[k] = json::parse(raw);

    json records = json::array();
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto* extra =
            i < ds.record_extras.size() ? &ds.record_extras[i] : nullptr;
        records.push_back(record_to_json(ds.records[i], extra));
    }

    json root = json::object();
    root["meta"] = std::move(meta);
    root["records"] = std::move(records);
    for (const auto& [k, raw] : ds.root_extra) root[k] = json::parse(raw);
    return root;
}

}  // namespace

DatasetError::DatasetError(std::string field, std::optional<std::size_t> record_index,
                           const std::string& message)
    : std::runtime_error(where(record_index, field) + ": " + message),
      field_(std::move(field)),
      record_index_(record_index) {}

void validate_dataset(const DatasetFile& ds) {
    FieldCtx ctx{std::nullopt};
    if (ds.meta.format_version != kDatasetFormatVersion)
        fail(ctx, "format_version",
             "unsupported version '" + ds.meta.format_version + "'");
    if (ds.meta.bases.empty()) fail(ctx, "bases", "bases must be non-empty");
    for (int b : ds.meta.bases)
        if (b < 2) fail(ctx, "bases", "bases must be >= 2");
    for (std::size_t i = 0; i < ds.records.size(); ++i) validate_record(ds.records[i], i);
}

DatasetFile load_dataset(const std::string& path, LoadMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("file", std::nullopt, "cannot open '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DatasetError("file", std::nullopt, std::string("invalid JSON: ") + e.what());
    }

    DatasetFile ds;
    FieldCtx ctx{std::nullopt};
    if (!root.is_object()) fail(ctx, "file", "top level must be an object");
    static const std::set<std::string> root_known = {"meta", "records"};
    sift_fields(root, {}, root_known, mode, ctx, "top level", ds.root_extra, ds.warnings);

    json meta = require(root, "meta", ctx);
    if (!meta.is_object()) fail(ctx, "meta", "expected an object");
    static const std::set<std::string> meta_known = {
        "format_version", "seed", "bases", "created_utc", "params_grid"};
    sift_fields(meta, meta_aliases(), meta_known, mode, ctx, "meta", ds.meta.extra,
                ds.warnings);
    const json& fv = require(meta, "format_version", ctx);
    if (fv.is_string())
        ds.meta.format_version = fv.get<std::string>();
    else if (fv.is_number_integer())
        ds.meta.format_version = std::to_string(fv.get<std::int64_t>());
    else
        fail(ctx, "format_version", "expected a string");
    ds.meta.seed = get_uint(require(meta, "seed", ctx), "seed", ctx);
    const json& bases = require(meta, "bases", ctx);
    if (!bases.is_array()) fail(ctx, "bases", "expected an array");
    for (const auto& b : bases)
        ds.meta.bases.push_back(static_cast<int>(get_int(b, "bases", ctx)));
    ds.meta.created_utc = get_string(require(meta, "created_utc", ctx), "created_utc", ctx);
    ds.meta.params_grid = get_string(require(meta, "params_grid", ctx), "params_grid", ctx);

    const json& records = require(root, "records", ctx);
    if (!records.is_array()) fail(ctx, "records", "expected an array");
    ds.records.reserve(records.size());
    ds.record_extras.resize(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        ds.records.push_back(
            record_from_json(records[i], mode, i, ds.record_extras[i], ds.warnings));
    }

    validate_dataset(ds);
    return ds;
}

void save_dataset(const std::string& path, const DatasetFile& ds, bool append) {
    const DatasetFile* out = &ds;
    DatasetFile merged;
    if (append && std::filesystem::exists(path)) {
        merged = load_dataset(path, LoadMode::Compat);
        merged.records.insert(merged.records.end(), ds.records.begin(), ds.records.end());
        merged.record_extras.resize(merged.records.size());
        std::size_t off = merged.records.size() - ds.records.size();
        for (std::size_t i = 0; i < ds.record_extras.size() && i < ds.records.size(); ++i)
            merged.record_extras[off + i] = ds.record_extras[i];
        out = &merged;
    }
    validate_dataset(*out);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DatasetError("file", std::nullopt, "cannot write '" + path + "'");
    f << dataset_to_json(*out).dump(2) << '\n';
    if (!f) throw DatasetError("file", std::nullopt, "write failed for '" + path + "'");
}

std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(sde, &end, 10);
        if (end && *end == '\0') t = static_cast<std::time_t>(v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_pseudoprime_witness(const CompositeRecord& record, const std::string& path) {
    json j = json::object();
    j["alert"] = "strong Lucas pass on an MR-resistant composite";
    j["record"] = record_to_json(record, nullptr);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DatasetError("file", std::nullopt, "cannot write witness '" + path + "'");
    f << j.dump(2) << '\n';
}

}  // namespace cforge
