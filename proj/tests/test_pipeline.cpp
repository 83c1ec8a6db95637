#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cforge/dataset.hpp"
#include "cforge/forge.hpp"
#include "cforge/lucas.hpp"
#include "cforge/pipeline.hpp"

using cforge::BigInt;

namespace {

namespace fs = std::filesystem;

cforge::CompositeRecord bare_record(unsigned long p1, std::int64_t k, std::int64_t M) {
    auto t = cforge::build_triple(BigInt(p1), k, M);
    cforge::CompositeRecord r;
    r.p1 = BigInt(p1);
    r.p2 = t.p2;
    r.p3 = t.p3;
    r.n = t.n;
    r.k = k;
    r.M = M;
    r.n_bits = static_cast<int>(cforge::bitlen(t.n));
    r.residues_mod35 = {static_cast<int>(p1 % 35),
                        static_cast<int>(mpz_get_ui(BigInt(t.p2 % 35).get_mpz_t())),
                        static_cast<int>(mpz_get_ui(BigInt(t.p3 % 35).get_mpz_t()))};
    auto mr = cforge::mr_filter(t.n, {2, 3, 5, 7, 11});
    r.mr_passed = mr.passed;
    r.mr_first_fail = mr.first_fail;
    return r;
}

}  // namespace

TEST_CASE("probe_records fills measurements and skips already-measured ones") {
    // 2821 = 7*13*31 ends in the D = -7 gcd shortcut; 488881 = 37*73*181
    // settles Selfridge parameters at D = -11 and gets a real measurement
    std::vector<cforge::CompositeRecord> records{bare_record(7, 2, 5),
                                                 bare_record(37, 2, 5)};
    fs::path witness = fs::temp_directory_path() / "cforge_probe_witness.json";
    fs::remove(witness);

    auto st = cforge::probe_records(records, witness.string());
    CHECK(st.measured == 2);
    CHECK(st.gcd_shortcuts == 1);  // 2821 shares the factor 7 with D = -7
    CHECK(st.lucas_pseudoprimes == 0);
    REQUIRE(records[0].lucas.has_value());
    REQUIRE(records[1].lucas.has_value());
    CHECK_FALSE(fs::exists(witness));

    auto again = cforge::probe_records(records, witness.string());
    CHECK(again.measured == 0);
}

TEST_CASE("a strong Lucas pass on an MR-resistant record aborts with a witness") {
    // 5459 = 53 * 103 passes the strong Lucas test; fake an MR-resistant record
    // around it (probe only reads n and the MR flags)
    cforge::CompositeRecord r;
    r.p1 = BigInt(53);
    r.p2 = BigInt(103);
    r.p3 = BigInt(1);
    r.n = BigInt(5459);
    r.k = 2;
    r.M = 3;
    r.n_bits = 13;
    r.residues_mod35 = {18, 33, 1};
    r.mr_passed = {2, 3, 5, 7, 11};  // looks fully resistant
    r.mr_first_fail = std::nullopt;

    fs::path witness = fs::temp_directory_path() / "cforge_alarm_witness.json";
    fs::remove(witness);
    std::vector<cforge::CompositeRecord> records{r};

    CHECK_THROWS_AS(cforge::probe_records(records, witness.string()),
                    cforge::LucasPassAlarm);
    CHECK(fs::exists(witness));

    try {
        records[0].lucas.reset();
        cforge::probe_records(records, witness.string());
    } catch (const cforge::LucasPassAlarm& e) {
        CHECK(e.record_index() == 0);
        CHECK(e.witness_path() == witness.string());
        CHECK(std::string(e.what()).find("5459") != std::string::npos);
        CHECK(std::string(e.what()).find(witness.string()) != std::string::npos);
    }
    fs::remove(witness);
}

TEST_CASE("a strong Lucas pass on a witnessed record is counted, not fatal") {
    cforge::CompositeRecord r;
    r.p1 = BigInt(53);
    r.p2 = BigInt(103);
    r.p3 = BigInt(1);
    r.n = BigInt(5459);
    r.k = 2;
    r.M = 3;
    r.n_bits = 13;
    r.residues_mod35 = {18, 33, 1};
    r.mr_passed = {};
    r.mr_first_fail = 2;  // the MR battery already caught it

    fs::path witness = fs::temp_directory_path() / "cforge_nonfatal_witness.json";
    fs::remove(witness);
    std::vector<cforge::CompositeRecord> records{r};
    auto st = cforge::probe_records(records, witness.string());
    CHECK(st.lucas_pseudoprimes == 1);
    CHECK_FALSE(fs::exists(witness));
}

TEST_CASE("make_meta describes the run") {
    cforge::ConstructionParams params;
    params.k_lo = 2;
    params.k_hi = 50;
    params.M_lo = 2;
    params.M_hi = 50;
    params.target_bits = 60;
    params.seed = 42;
    params.budget.count = 100;
    auto meta = cforge::make_meta(params, cforge::ForgeMode::AllCarmichael);
    CHECK(meta.seed == 42);
    CHECK(meta.bases == params.bases);
    CHECK(meta.params_grid.find("k=2..50") != std::string::npos);
    CHECK(meta.params_grid.find("M=2..50") != std::string::npos);
    CHECK(meta.params_grid.find("bits=60") != std::string::npos);
    CHECK(meta.params_grid.find("mode=all-carmichael") != std::string::npos);
    CHECK(meta.params_grid.find("count=100") != std::string::npos);
    CHECK_FALSE(meta.created_utc.empty());

    auto meta2 = cforge::make_meta(params, cforge::ForgeMode::MrResistant);
    CHECK(meta2.params_grid.find("mode=mr-resistant") != std::string::npos);
}
