#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <vector>

#include "ket/corpus.hpp"
#include "ket/entanglement.hpp"
#include "ket/stats.hpp"

namespace {

using namespace ket;

// Synthetic corpus + gazetteer sized by the benchmark argument.
std::string make_corpus(int chapters, int entities, std::mt19937& rng) {
    std::ostringstream out;
    for (int c = 0; c < chapters; ++c) {
        out << "CHAPTER " << (c + 1) << "\n";
        for (int line = 0; line < 20; ++line) {
            for (int w = 0; w < 8; ++w) {
                if (rng() % 4 == 0) {
                    out << "Entity" << (rng() % entities) << " ";
                } else {
                    out << "word ";
                }
            }
            out << "\n";
        }
    }
    return out.str();
}

Gazetteer make_gazetteer(int entities) {
    std::vector<Entity> entries;
    for (int i = 0; i < entities; ++i) {
        std::string name = "Entity" + std::to_string(i);
        entries.push_back({i + 1, name, {name}, EntityCategory::Character, 0});
    }
    return Gazetteer(std::move(entries));
}

DomainGraph make_graph(int nodes, double edge_prob, std::mt19937& rng) {
    std::vector<Entity> entities;
    std::vector<WeightedEdge> edges;
    for (int i = 0; i < nodes; ++i) {
        std::string name = "e" + std::to_string(i + 1);
        entities.push_back({i + 1, name, {name}, EntityCategory::Character,
                            rng() % 50});
    }
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 1; i <= nodes; ++i) {
        for (int j = i + 1; j <= nodes; ++j) {
            if (u(rng) < edge_prob) {
                edges.push_back({i, j, double(1 + rng() % 9)});
            }
        }
    }
    return DomainGraph(std::move(entities), std::move(edges), {});
}

void BM_BuildGraph(benchmark::State& state) {
    std::mt19937 rng(1);
    const int entities = 50;
    auto corpus = make_corpus(int(state.range(0)), entities, rng);
    auto gaz = make_gazetteer(entities);
    for (auto _ : state) {
        auto chapters = segment_corpus(corpus, "^CHAPTER");
        benchmark::DoNotOptimize(build_graph(chapters, gaz));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildGraph)->Arg(8)->Arg(32)->Arg(128)->Complexity();

void BM_EntanglementVector(benchmark::State& state) {
    std::mt19937 rng(2);
    const int nodes = int(state.range(0));
    auto graph = make_graph(nodes, 0.1, rng);
    std::vector<EntityId> subset;
    for (int i = 1; i <= nodes; i += 3) subset.push_back(i);
    DwisConfig cfg{{1}, 0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            entanglement_vector(graph, "p", subset, cfg));
    }
    state.SetComplexityN(nodes);
}
BENCHMARK(BM_EntanglementVector)->Arg(32)->Arg(128)->Arg(512)->Complexity();

void BM_LogisticFit(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> x_dist(-4, 4);
    std::uniform_real_distribution<double> u(0, 1);
    const int n = int(state.range(0));
    std::vector<double> xs;
    std::vector<int> ys;
    for (int i = 0; i < n; ++i) {
        double x = x_dist(rng);
        xs.push_back(x);
        ys.push_back(u(rng) < sigmoid(-1.0 + 0.7 * x) ? 1 : 0);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_logistic(xs, ys, 42));
    }
}
BENCHMARK(BM_LogisticFit)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
