#pragma once

#include <string>
#include <vector>

#include "fock.hpp"
#include "report.hpp"

namespace elvlab {

inline const char* kernel_kind_name(KernelKind k) {
    switch (k) {
        case KernelKind::f: return "f";
        case KernelKind::h: return "h";
        case KernelKind::f_star: return "f*";
        case KernelKind::h_star: return "h*";
    }
    return "?";
}

inline json law_json(const LatticeLaw& l) {
    return json{{"from", l.from},   {"to", l.to},           {"sgn", l.sgn},
                {"e0", l.e0},       {"step", l.step},       {"two_sided", l.two_sided},
                {"side", side_name(l.side)}, {"source", l.source}};
}

inline json closed_form_json(const ClosedForm& cf) {
    json factors = json::array();
    for (auto& f : cf.factors)
        factors.push_back(json{{"sgn", f.sgn}, {"xexp", f.xexp}, {"nome_xexps", f.nome_xexps}, {"power", f.power}});
    return json{{"id", cf.id}, {"gamma", cplx_json(cf.gamma)}, {"sign", cplx_json(cf.sign)}, {"factors", factors}};
}

inline json descriptor_json(const KernelDescriptor& kd) {
    json ops = json::array(), forms = json::array(), kernels = json::array(), poles = json::array(),
         zeros = json::array();
    for (auto& o : kd.ops)
        ops.push_back(json{{"kind", op_kind_name(o.kind)},
                           {"j", o.j},
                           {"charge", o.charge},
                           {"weight", o.weight},
                           {"momentum_offset", o.momentum_offset}});
    for (auto& [ij, cf] : kd.pair_forms) {
        json f = closed_form_json(cf);
        f["pair"] = {ij.first, ij.second};
        forms.push_back(f);
    }
    for (auto& k : kd.kernels)
        kernels.push_back(json{{"earlier", k.earlier}, {"later", k.later}, {"kind", kernel_kind_name(k.kind)}, {"weight", k.weight}});
    for (auto& l : kd.poles) poles.push_back(law_json(l));
    for (auto& l : kd.zeros) zeros.push_back(law_json(l));
    return json{{"ops", ops}, {"pair_forms", forms}, {"kernels", kernels}, {"poles", poles}, {"zeros", zeros}};
}

struct NamedChain {
    std::string name;
    std::vector<std::pair<OpKind, int>> ops;
};

// Operator chains behind the vertex-operator and tail-operator integrands, in display order.
inline std::vector<NamedChain> standard_chains(int n) {
    using K = OpKind;
    std::vector<NamedChain> out;
    for (int mu = 0; mu < n; ++mu) {
        for (bool one : {true, false}) {
            K w = one ? K::U_omega : K::V_omega, a = one ? K::U_alpha : K::V_alpha;
            std::string tag = one ? "typeI" : "typeII";
            NamedChain c{tag + "[mu=" + std::to_string(mu) + "]", {{w, 1}}};
            for (int j = 1; j <= mu; ++j) c.ops.push_back({a, j});
            out.push_back(c);
            NamedChain d{tag + "_dual[mu=" + std::to_string(mu) + "]", {{w, n - 1}}};
            for (int j = n - 1; j >= mu + 1; --j) d.ops.push_back({a, j});
            out.push_back(d);
        }
    }
    for (int mu = 0; mu < n - 1; ++mu)
        for (int nu = mu + 1; nu < n; ++nu) {
            NamedChain c{"bose_lambda[mu=" + std::to_string(mu) + ",nu=" + std::to_string(nu) + "]", {}};
            for (int j = mu + 1; j <= nu; ++j) c.ops.push_back({K::U_alpha, j});
            out.push_back(c);
        }
    for (int mu = 0; mu <= n - 2; ++mu) {
        NamedChain c{"lambda_repII[mu=" + std::to_string(mu) + "]", {{K::W_alpha, n - 1}}};
        for (int j = n - 2; j >= mu + 1; --j) c.ops.push_back({K::V_alpha, j});
        out.push_back(c);
    }
    out.push_back({"typeI_typeII_exchange", {{K::U_omega, 1}, {K::V_omega, 1}}});
    return out;
}

inline json kernel_catalog(const ModelParams& p) {
    json chains = json::array();
    for (auto& c : standard_chains(p.n)) {
        std::vector<FreeFieldOperator> ops;
        for (auto [k, j] : c.ops) ops.push_back(build_basic_op(k, j, SpectralPoint{}, 1, p));
        json entry = descriptor_json(assemble_kernel(ops, p));
        entry["chain"] = c.name;
        chains.push_back(entry);
    }
    return json{{"params", params_json(p)}, {"chains", chains}};
}

}  // namespace elvlab
