#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rvc/fractional.hpp"
#include "rvc/gadgets.hpp"
#include "rvc/rpq.hpp"

using nlohmann::json;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw rvc::Error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json cost_json(const rvc::Cost& c)
{
    return c.str();
}

json removal_json(const rvc::BagDatabase& db,
    const std::vector<std::pair<rvc::TupleId, long long>>& removed)
{
    json arr = json::array();
    for (const auto& [id, mult] : removed) {
        json row;
        row["rel"] = id.relation;
        json tuple = json::array();
        for (int e : id.tuple)
            tuple.push_back(db.elements()[e]);
        row["tuple"] = std::move(tuple);
        row["mult"] = mult;
        arr.push_back(std::move(row));
    }
    return arr;
}

int run_vcsp_solve(const std::string& structure_path, const std::string& instance_path,
    const std::string& threshold)
{
    rvc::ValuedStructure gamma = rvc::valued_structure_from_json(slurp(structure_path));
    rvc::TauExpression expr = rvc::instance_expression_from_json(slurp(instance_path), gamma);
    rvc::OptResult opt = rvc::solve_exact(expr, gamma);
    rvc::BlpResult blp = rvc::solve_blp(expr, gamma);
    json out;
    out["cost"] = cost_json(opt.cost);
    if (opt.witness) {
        json w = json::object();
        for (size_t v = 0; v < expr.variables.size(); ++v)
            w[expr.variables[v]] = gamma.domain()[(*opt.witness)[v]];
        out["witness"] = std::move(w);
    } else {
        out["witness"] = nullptr;
    }
    out["blp_bound"] = cost_json(blp.bound);
    if (!threshold.empty()) {
        rvc::Rational u = rvc::parse_rational(threshold);
        out["threshold"] = rvc::to_string(u);
        out["meets_threshold"] = opt.cost <= rvc::Cost(u);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_classify(const std::string& structure_path, int arity, bool siggers, size_t cap)
{
    rvc::ValuedStructure gamma = rvc::valued_structure_from_json(slurp(structure_path));
    json out;
    rvc::CyclicSearch search = rvc::find_cyclic_fpol(gamma, arity, cap);
    switch (search.outcome) {
    case rvc::SearchOutcome::Found: {
        out["cyclic_fpol"] = "found";
        json support = json::array();
        for (const auto& [op, w] : search.omega->support) {
            json row;
            row["weight"] = rvc::to_string(w);
            row["table"] = op.table;
            support.push_back(std::move(row));
        }
        out["cyclic_support"] = std::move(support);
        break;
    }
    case rvc::SearchOutcome::None:
        out["cyclic_fpol"] = "none";
        break;
    case rvc::SearchOutcome::CapExceeded:
        out["cyclic_fpol"] = "cap";
        break;
    }
    if (siggers || gamma.domain_size() <= 2) {
        try {
            out["siggers_support"] = rvc::siggers_in_support(gamma, cap);
        } catch (const rvc::CapExceeded& e) {
            out["siggers_support"] = "cap";
        }
    } else {
        out["siggers_support"] = nullptr;
    }
    out["core_domain_size"] = rvc::core_reduce(gamma, cap).domain_size();
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_resilience(const std::string& query_path, const std::string& db_path,
    const std::string& route, const std::string& threshold, int m)
{
    rvc::QueryFile qf = rvc::parse_query_file(slurp(query_path));
    rvc::BagDatabase db = rvc::load_bag_database(db_path, qf.signature, qf.exogenous);
    rvc::ResilienceOptions options;
    options.type_arity = m;
    if (route == "auto") {
        options.route = rvc::Route::Auto;
    } else if (route == "hitting") {
        options.route = rvc::Route::Hitting;
    } else if (route == "types") {
        options.route = rvc::Route::Types;
    } else if (route.rfind("dual=", 0) == 0) {
        options.route = rvc::Route::Dual;
        options.dual = rvc::relational_structure_from_json(slurp(route.substr(5)));
    } else {
        throw rvc::Error("unknown route '" + route + "'");
    }
    rvc::ResilienceResult res = rvc::resilience_solve(db, qf.query, options);
    json out;
    out["resilience"] = cost_json(res.value);
    out["removed"] = removal_json(db, res.removed);
    out["route"] = res.route_used;
    if (!threshold.empty()) {
        rvc::Rational u = rvc::parse_rational(threshold);
        out["within_threshold"] = res.value <= rvc::Cost(u);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_gadgets(const std::string& name, const std::string& model_path)
{
    rvc::GadgetReport report;
    if (name == "nae") {
        report = rvc::verify_nae_gadget();
    } else if (name == "triangle") {
        rvc::RelationalStructure model = model_path.empty()
            ? rvc::build_triangle_witness_model()
            : rvc::relational_structure_from_json(slurp(model_path));
        report = rvc::verify_triangle_gadget(model);
    } else if (name == "mu1") {
        rvc::RelationalStructure model = model_path.empty()
            ? rvc::mu1_five_element_model()
            : rvc::relational_structure_from_json(slurp(model_path));
        report = rvc::verify_mu1_polymorphism(model);
    } else {
        throw rvc::Error("unknown gadget '" + name + "'");
    }
    json out;
    out["gadget"] = name;
    json checks = json::array();
    for (const auto& c : report.checks) {
        json row;
        row["claim"] = c.claim;
        row["pass"] = c.pass;
        if (!c.detail.empty())
            row["detail"] = c.detail;
        checks.push_back(std::move(row));
    }
    out["checks"] = std::move(checks);
    out["all_pass"] = report.all_pass();
    std::cout << out.dump(2) << "\n";
    return report.all_pass() ? 0 : 1;
}

int run_rpq(const std::string& query, const std::string& db_path, bool resilience,
    const std::string& query_file)
{
    rvc::Signature sig;
    std::set<std::string> exogenous;
    if (!query_file.empty()) {
        rvc::QueryFile qf = rvc::parse_query_file(slurp(query_file));
        sig = qf.signature;
        exogenous = qf.exogenous;
    } else {
        // Signature from the database file: every relation is binary.
        json j = json::parse(slurp(db_path));
        for (auto& [rel, rows] : j.at("relations").items())
            sig.add(rel, 2);
    }
    rvc::BagDatabase db = rvc::load_bag_database(db_path, sig, exogenous);
    rvc::Rpq q = rvc::parse_rpq(query, sig);
    json out;
    if (resilience) {
        rvc::RpqResilienceResult res = rvc::rpq_resilience(db, q);
        out["resilience"] = cost_json(res.value);
        out["removed"] = removal_json(db, res.removed);
        out["iterations"] = res.iterations;
    } else {
        json answers = json::array();
        for (const auto& [a, b] : rvc::evaluate_rpq(db, q))
            answers.push_back(json::array({db.elements()[a], db.elements()[b]}));
        out["answers"] = std::move(answers);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"resilience and valued constraint toolkit"};
    app.require_subcommand(1);

    auto* vcsp = app.add_subcommand("vcsp", "valued constraint satisfaction");
    vcsp->require_subcommand(1);
    auto* solve = vcsp->add_subcommand("solve", "exact optimum and BLP bound of an instance");
    std::string structure_path, instance_path, threshold;
    solve->add_option("--structure", structure_path, "valued structure JSON")->required();
    solve->add_option("--instance", instance_path, "instance JSON")->required();
    solve->add_option("--threshold", threshold, "decision threshold p/q");

    auto* classify = app.add_subcommand("classify", "tractability diagnostics for a structure");
    std::string cls_structure;
    int cls_arity = 2;
    bool cls_siggers = false;
    size_t cls_cap = 70000;
    classify->add_option("--structure", cls_structure, "valued structure JSON")->required();
    classify->add_option("--arity", cls_arity, "cyclic arity (default 2)");
    classify->add_flag("--siggers", cls_siggers, "force the Siggers-support LP");
    classify->add_option("--op-cap", cls_cap, "operation count cap");

    auto* resilience = app.add_subcommand("resilience", "resilience of a query on a bag database");
    std::string res_query, res_db, res_route = "auto", res_threshold;
    int res_m = 0;
    resilience->add_option("--query", res_query, "query file")->required();
    resilience->add_option("--db", res_db, "database (JSON file or CSV directory)")->required();
    resilience->add_option("--route", res_route, "auto|hitting|dual=<file>|types");
    resilience->add_option("--threshold", res_threshold, "decision threshold");
    resilience->add_option("--m", res_m, "orbit-type arity for the types route");

    auto* gadgets = app.add_subcommand("gadgets", "paper constructions");
    gadgets->require_subcommand(1);
    auto* verify = gadgets->add_subcommand("verify", "check one construction");
    std::string gadget_name, gadget_model;
    verify->add_option("--name", gadget_name, "nae|triangle|mu1")->required();
    verify->add_option("--model", gadget_model, "model JSON");

    auto* rpq = app.add_subcommand("rpq", "two-way regular path queries");
    std::string rpq_query, rpq_db, rpq_query_file;
    bool rpq_res = false;
    rpq->add_option("--query", rpq_query, "2RPQ, e.g. \"R;(S+T)*\"")->required();
    rpq->add_option("--db", rpq_db, "database (JSON file or CSV directory)")->required();
    rpq->add_option("--signature", rpq_query_file, "query file supplying signature/exogenous");
    rpq->add_flag("--resilience", rpq_res, "compute resilience instead of answers");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return run_vcsp_solve(structure_path, instance_path, threshold);
        if (classify->parsed())
            return run_classify(cls_structure, cls_arity, cls_siggers, cls_cap);
        if (resilience->parsed())
            return run_resilience(res_query, res_db, res_route, res_threshold, res_m);
        if (verify->parsed())
            return run_gadgets(gadget_name, gadget_model);
        if (rpq->parsed())
            return run_rpq(rpq_query, rpq_db, rpq_res, rpq_query_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
