#include <doctest.h>

#include "rvc/gadgets.hpp"

using namespace rvc;

TEST_CASE("NAE gadget matches bit-exactly")
{
    GadgetReport report = verify_nae_gadget();
    for (const auto& c : report.checks)
        CHECK_MESSAGE(c.pass, c.claim, " ", c.detail);
}

TEST_CASE("seven disjoint triangle images pack into the gadget expression")
{
    CHECK(triangle_packing_exists());
}

TEST_CASE("triangle witness model passes the full gadget verification")
{
    RelationalStructure model = build_triangle_witness_model();
    CHECK(!satisfies(model, triangle_query()));
    GadgetReport report = verify_triangle_gadget(model);
    for (const auto& c : report.checks)
        CHECK_MESSAGE(c.pass, c.claim, " ", c.detail);
}

TEST_CASE("triangle gadget rejects models that realize the query")
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 2);
    sig.add("T", 2);
    RelationalStructure bad(sig, {"a", "b", "c"});
    bad.add_tuple("R", {0, 1});
    bad.add_tuple("S", {1, 2});
    bad.add_tuple("T", {2, 0});
    GadgetReport report = verify_triangle_gadget(bad);
    CHECK(!report.all_pass());
}

TEST_CASE("mu1 preconditions are reported with witnesses")
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 1);
    RelationalStructure bad(sig, {"a", "b"});
    CHECK(mu1_precondition_violation(bad).find("totality") != std::string::npos);

    RelationalStructure sat(sig, {"a", "b"});
    sat.add_tuple("S", {0});
    sat.add_tuple("R", {0, 1});
    sat.add_tuple("R", {1, 0});
    sat.add_tuple("R", {1, 1});
    CHECK(mu1_precondition_violation(sat).find("satisfies") != std::string::npos);
    CHECK_THROWS_AS(build_mu1_product(sat), Error);
}

TEST_CASE("mu1 product on a single point is a single point")
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 1);
    RelationalStructure point(sig, {"a"});
    Mu1Product prod = build_mu1_product(point);
    CHECK(prod.m.size() == 1);
    CHECK(prod.m.tuples("R").empty());
    CHECK(prod.m.tuples("S").empty());
    CHECK(prod.n.tuples("R").empty());
}

TEST_CASE("mu1 five-element model passes all claims")
{
    RelationalStructure f = mu1_five_element_model();
    REQUIRE(mu1_precondition_violation(f).empty());
    GadgetReport report = verify_mu1_polymorphism(f);
    for (const auto& c : report.checks)
        CHECK_MESSAGE(c.pass, c.claim, " ", c.detail);
}

TEST_CASE("mu1 claims hold for every admissible model on up to 3 elements")
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 1);
    int admissible = 0;
    for (int n = 1; n <= 3; ++n) {
        std::vector<std::pair<int, int>> pairs;
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                pairs.push_back({u, v});
        for (size_t rmask = 0; rmask < (size_t(1) << pairs.size()); ++rmask) {
            for (int smask = 0; smask < (1 << n); ++smask) {
                std::vector<std::string> names;
                for (int i = 0; i < n; ++i)
                    names.push_back("e" + std::to_string(i));
                RelationalStructure f(sig, names);
                for (size_t i = 0; i < pairs.size(); ++i)
                    if (rmask & (size_t(1) << i))
                        f.add_tuple("R", {pairs[i].first, pairs[i].second});
                for (int i = 0; i < n; ++i)
                    if (smask & (1 << i))
                        f.add_tuple("S", {i});
                if (!mu1_precondition_violation(f).empty())
                    continue;
                ++admissible;
                GadgetReport report = verify_mu1_polymorphism(f);
                if (!report.all_pass()) {
                    for (const auto& c : report.checks)
                        CHECK_MESSAGE(c.pass, c.claim, " ", c.detail, " (n=", n,
                            " rmask=", rmask, " smask=", smask, ")");
                    return;
                }
            }
        }
    }
    CHECK(admissible > 0);
}
