// Copyright 2026 The diffmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_common.hpp"

#include <cstdio>

namespace io_test {

using namespace diffmon;
using namespace testutil;
using io::json;

std::string sample(const std::string& name) { return std::string(DIFFMON_SAMPLES_DIR) + "/" + name; }

TEST(Io, ReadsHeterodyneSample) {
    const auto doc = io::read_rep(sample("heterodyne.json"));
    EXPECT_EQ(doc.type, "mrep");
    EXPECT_NEAR(doc.eta(0), 1.0, 1e-12);
    EXPECT_EQ(io::format_vector(doc.eta), "[1.0]");
}

TEST(Io, ErrorCategories) {
    EXPECT_EQ(error_code_of([] { io::read_rep(sample("truncated.json")); }), ErrorCode::ParseError);
    const std::string missing = error_message_of([] { io::read_rep(sample("missing_matrix.json")); });
    EXPECT_NE(missing.find("matrix"), std::string::npos) << missing;
    EXPECT_EQ(error_code_of([] { io::read_rep(sample("missing_matrix.json")); }), ErrorCode::SchemaError);
    const std::string bad = error_message_of([] { io::read_rep(sample("brep_bad_theta.json")); });
    EXPECT_NE(bad.find("theta[0]"), std::string::npos) << bad;
    EXPECT_EQ(error_code_of([] { io::read_rep(sample("brep_bad_theta.json")); }),
              ErrorCode::ValidationError);
    EXPECT_EQ(error_code_of([] { io::read_rep(sample("does_not_exist.json")); }), ErrorCode::IoError);
}

TEST(Io, RoundTripsEveryRep) {
    Rng rng(91);
    const MRep m = sampling::mrep(rng, 2, 1.3);
    const auto back_m = io::rep_from_json(json::parse(io::to_json(m).dump()));
    EXPECT_TRUE(back_m.mrep->matrix == m.matrix);
    EXPECT_EQ(back_m.hbar, 1.3);

    const URep u = mrep_to_urep(m);
    EXPECT_TRUE(io::rep_from_json(json::parse(io::to_json(u).dump())).urep->matrix == u.matrix);

    const TRep t = mrep_to_trep(m);
    EXPECT_TRUE(io::rep_from_json(json::parse(io::to_json(t).dump())).trep->matrix == t.matrix);

    const BRep b = sampling::brep(rng, 2);
    const OrthoMatrix o = make_ortho(sampling::orthogonal(rng, 4));
    const auto back_b = io::rep_from_json(json::parse(io::to_json(b, 1.3, o).dump()));
    EXPECT_TRUE(back_b.brep->s == b.s);
    EXPECT_TRUE(back_b.ortho->matrix == o.matrix);
    EXPECT_LT((io::to_mrep(back_b).matrix - brep_o_to_mrep(b, o, 1.3).matrix).norm(), 1e-15);
}

TEST(Io, UrepToMrepUsesSymmetricRoot) {
    const auto doc = io::read_rep(sample("heterodyne_urep.json"));
    const MRep m = io::to_mrep(doc);
    EXPECT_LT((mrep_to_urep(m).matrix - doc.urep->matrix).norm(), 1e-12);
}

TEST(Io, Models) {
    const LindbladModel model = io::read_model(sample("driven_tls_model.json"));
    EXPECT_EQ(model.dim(), 2);
    EXPECT_LT((model.hamiltonian() - 0.5 * sigma_x()).norm(), 1e-15);
    EXPECT_LT((model.lindblads()[0] - sigma_minus()).norm(), 1e-15);
    const LindbladModel again = io::model_from_json(json::parse(io::to_json(model).dump()));
    EXPECT_TRUE(again.hamiltonian() == model.hamiltonian());

    json bad = io::to_json(model);
    bad["hamiltonian"][0][1] = json::array({0.0, 1.0});
    EXPECT_EQ(error_code_of([&] { io::model_from_json(bad); }), ErrorCode::ValidationError);
}

TEST(Io, Formatting) {
    EXPECT_EQ(io::format_real(1.0), "1.0");
    EXPECT_EQ(io::format_real(0.25), "0.25");
    EXPECT_EQ(io::format17(0.1), "0.10000000000000001");
    EXPECT_EQ(io::fingerprint(""), "cbf29ce484222325");
    EXPECT_EQ(io::fingerprint("a"), "af63dc4c8601ec8c");
}

TEST(Io, TrajectoryCsv) {
    SimulationConfig cfg;
    cfg.dt = 0.1;
    cfg.steps = 3;
    cfg.n_traj = 2;
    ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
    const LindbladModel model(zero, {sigma_minus(), sigma_z()});
    const Ensemble ens = simulate_ensemble(model, zero_mrep(2), excited(), cfg);
    const std::string csv = io::trajectory_csv(ens);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,traj,y_1,y_2,y_3,y_4,purity,log_weight");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
    EXPECT_EQ(io::trajectory_csv(simulate_ensemble(model, zero_mrep(2), excited(), cfg)), csv);
}

TEST(Io, ConvergenceTables) {
    ConvergenceReport rep;
    rep.times = {0.0, 1.0};
    rep.trace_distance = {0.0, 0.1};
    rep.bias = {0.0, 0.2};
    rep.noise_mean = RealVector::Zero(2);
    rep.noise_covariance = RealMatrix::Identity(2, 2);
    const auto tables = io::convergence_tables(rep);
    ASSERT_EQ(tables.size(), 3u);
    EXPECT_EQ(tables[0].csv(), "t,trace_distance,bias\n0,0,0\n1,0.10000000000000001,0.20000000000000001\n");
    EXPECT_TRUE(io::tables_to_json(tables).contains("noise_moments"));
}

}  // namespace io_test
