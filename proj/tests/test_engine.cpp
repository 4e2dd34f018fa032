/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 Pipesim Contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "pipesim/engine.hpp"
#include "pipesim/errors.hpp"

using namespace pipesim;

namespace {

ContentionConfig quiet() {
  ContentionConfig c;
  c.jitter_sigma = 0.0;
  return c;
}

DeviceSpec device48(SchedMode mode = SchedMode::TimeSliced, bool graphics = true) {
  DeviceSpec d;
  d.sm_count = 48;
  d.graphics_capable = graphics;
  d.sched_mode = mode;
  return d;
}

KernelTask kernel(int ctx, int sms, double ms, std::uint64_t mem = 0) {
  KernelTask t;
  t.context = ctx;
  t.sm_demand = sms;
  t.base_duration_ms = ms;
  t.memory_bytes = mem;
  return t;
}

}  // namespace

TEST_CASE("submit_kernel: full grant runs at base duration") {
  SimEngine engine(quiet());
  const int dev = engine.add_device(device48());
  const int ctx = engine.create_context(dev, "a", ContextKind::Compute);
  double finish = -1;
  engine.submit_kernel(dev, kernel(ctx, 10, 8.0), [&](double t) { finish = t; });
  engine.run();
  CHECK(finish == 8.0);
}

TEST_CASE("submit_kernel: half grant doubles the busy time") {
  // A 10-SM demand on a 5-SM device gets a 5-SM grant: linear slowdown.
  SimEngine engine(quiet());
  DeviceSpec d;
  d.sm_count = 5;
  const int dev = engine.add_device(d);
  const int ctx = engine.create_context(dev, "a", ContextKind::Compute);
  double finish = -1;
  engine.submit_kernel(dev, kernel(ctx, 10, 8.0), [&](double t) { finish = t; });
  engine.run();
  CHECK(finish == 16.0);
}

TEST_CASE("time-sliced quanta match the hand-rolled round-robin schedule") {
  ContentionConfig c = quiet();
  c.time_slice_quantum_ms = 2.0;
  c.ctx_switch_compute_compute_ms = 0.5;
  SimEngine engine(c);
  const int dev = engine.add_device(device48());
  const int a = engine.create_context(dev, "a", ContextKind::Compute);
  const int b = engine.create_context(dev, "b", ContextKind::Compute);

  std::map<int, double> finish;
  engine.schedule_at(0.0, [&] {
    engine.submit_kernel(dev, kernel(a, 8, 8.0), [&](double t) { finish[0] = t; });
    engine.submit_kernel(dev, kernel(b, 8, 8.0), [&](double t) { finish[1] = t; });
  });
  engine.run();

  const auto expected = oracles::round_robin_two_task_schedule({8.0, 8.0}, 2.0, 0.5);
  REQUIRE(finish.size() == 2);
  CHECK(finish[0] == expected[0]);  // 17.0
  CHECK(finish[1] == expected[1]);  // 19.5
  CHECK(finish[0] > 8.0);
  CHECK(finish[1] > 8.0);
}

TEST_CASE("time-sliced schedule matches the oracle for several context counts") {
  for (int n = 1; n <= 4; ++n) {
    ContentionConfig c = quiet();
    c.time_slice_quantum_ms = 2.0;
    c.ctx_switch_compute_compute_ms = 0.1;
    SimEngine engine(c);
    const int dev = engine.add_device(device48());
    std::vector<int> ctxs;
    std::vector<double> work;
    for (int i = 0; i < n; ++i) {
      ctxs.push_back(engine.create_context(dev, "c" + std::to_string(i),
                                           ContextKind::Compute));
      work.push_back(3.0 + i);  // distinct lengths
    }
    std::map<int, double> finish;
    engine.schedule_at(0.0, [&] {
      for (int i = 0; i < n; ++i) {
        engine.submit_kernel(dev, kernel(ctxs[static_cast<std::size_t>(i)], 4, work[static_cast<std::size_t>(i)]),
                             [&finish, i](double t) { finish[i] = t; });
      }
    });
    engine.run();
    const auto expected = oracles::round_robin_two_task_schedule(work, 2.0, 0.1);
    for (int i = 0; i < n; ++i) {
      CHECK(finish[i] == doctest::Approx(expected[static_cast<std::size_t>(i)]));
    }
  }
}

TEST_CASE("monotone contention: adding a context never speeds up existing tasks") {
  auto run_with = [](int contexts) {
    ContentionConfig c = quiet();
    SimEngine engine(c);
    const int dev = engine.add_device(device48());
    std::vector<double> finish(static_cast<std::size_t>(contexts), 0.0);
    engine.schedule_at(0.0, [&, contexts] {
      for (int i = 0; i < contexts; ++i) {
        const int ctx = engine.create_context(dev, "c" + std::to_string(i),
                                              ContextKind::Compute);
        engine.submit_kernel(dev, kernel(ctx, 6, 5.0),
                             [&finish, i](double t) { finish[static_cast<std::size_t>(i)] = t; });
      }
    });
    engine.run();
    return finish;
  };
  std::vector<double> prev;
  for (int n = 1; n <= 5; ++n) {
    const auto cur = run_with(n);
    for (std::size_t i = 0; i + 1 < prev.size() + 1 && i < prev.size(); ++i) {
      CHECK(cur[i] >= prev[i]);
    }
    prev = cur;
  }
}

TEST_CASE("renders: idle graphics device finishes at start plus duration") {
  SimEngine engine(quiet());
  const int dev = engine.add_device(device48());
  const int ctx = engine.create_context(dev, "a", ContextKind::Graphics);
  double finish = -1;
  engine.submit_render(dev, ctx, 4.0, 1.0, [&](double t) { finish = t; });
  engine.run();
  CHECK(finish == 4.0);
}

TEST_CASE("renders: submitted during a compute quantum, starts after quantum plus switch") {
  ContentionConfig c = quiet();
  c.time_slice_quantum_ms = 2.0;
  c.ctx_switch_compute_graphics_ms = 0.8;
  SimEngine engine(c);
  const int dev = engine.add_device(device48());
  const int comp = engine.create_context(dev, "a", ContextKind::Compute);
  const int gfx = engine.create_context(dev, "b", ContextKind::Graphics);

  double render_done = -1;
  engine.schedule_at(0.0, [&] {
    engine.submit_kernel(dev, kernel(comp, 8, 8.0));
  });
  engine.schedule_at(1.0, [&] {
    engine.submit_render(dev, gfx, 4.0, 1.0, [&](double t) { render_done = t; });
  });
  engine.run();
  // Current quantum runs to t=2, switch to graphics 0.8, render 4.
  CHECK(render_done == 2.0 + 0.8 + 4.0);
}

TEST_CASE("renders: non-preemptible once started") {
  ContentionConfig c = quiet();
  c.time_slice_quantum_ms = 2.0;
  SimEngine engine(c);
  const int dev = engine.add_device(device48());
  const int gfx = engine.create_context(dev, "g", ContextKind::Graphics);
  const int comp = engine.create_context(dev, "c", ContextKind::Compute);

  double render_done = -1;
  double kernel_done = -1;
  engine.schedule_at(0.0, [&] {
    engine.submit_render(dev, gfx, 10.0, 1.0, [&](double t) { render_done = t; });
  });
  engine.schedule_at(1.0, [&] {
    engine.submit_kernel(dev, kernel(comp, 4, 1.0), [&](double t) { kernel_done = t; });
  });
  engine.run();
  // The render holds the device for its full 10 ms despite the 2 ms quantum;
  // the kernel starts only after it, plus the graphics->compute switch.
  CHECK(render_done == 10.0);
  CHECK(kernel_done == 10.0 + 0.8 + 1.0);

  // No event interrupts the running render: nothing else starts in (0, 10).
  for (const auto& row : engine.event_log()) {
    if (row.event_kind == "kernel_start") {
      CHECK(row.time_ms >= 10.0);
    }
  }
}

TEST_CASE("renders: rejected on a compute-only device and for compute contexts") {
  SimEngine engine(quiet());
  const int dev = engine.add_device(device48(SchedMode::TimeSliced, false));
  const int gfx = engine.create_context(dev, "a", ContextKind::Graphics);
  const int comp = engine.create_context(dev, "a", ContextKind::Compute);
  CHECK_THROWS_AS(engine.submit_render(dev, gfx, 4.0), SimulationError);
  try {
    engine.submit_render(dev, gfx, 4.0);
  } catch (const SimulationError& e) {
    CHECK(e.code() == SimError::NotGraphicsCapable);
  }
  const int dev2 = engine.add_device(device48());
  CHECK_THROWS_AS(engine.submit_render(dev2, comp, 4.0), SimulationError);
  CHECK_THROWS_AS(engine.submit_kernel(dev2, kernel(gfx, 4, 1.0)), SimulationError);
}

TEST_CASE("transfers: latency plus bytes over bandwidth") {
  ContentionConfig c = quiet();
  c.transfer_latency_ms = 0.2;
  c.transfer_bandwidth_bytes_per_ms = 16000.0;
  SimEngine engine(c);
  engine.add_device(device48());
  engine.add_device(device48());

  SUBCASE("zero bytes costs only the latency") {
    double t1 = -1;
    TransferTask t{0, 1, 0, true};
    engine.submit_transfer(t, -1, [&](double x) { t1 = x; });
    engine.run();
    CHECK(t1 == 0.2);
  }
  SUBCASE("8 MB at 16000 bytes/ms") {
    double t1 = -1;
    TransferTask t{0, 1, 8'000'000, true};
    engine.submit_transfer(t, -1, [&](double x) { t1 = x; });
    engine.run();
    CHECK(t1 == 500.2);
  }
  SUBCASE("same device is rejected") {
    TransferTask t{0, 0, 100, true};
    CHECK_THROWS_AS(engine.submit_transfer(t), SimulationError);
  }
}

TEST_CASE("transfers: same-direction copies serialize on the lane") {
  ContentionConfig c = quiet();
  c.transfer_latency_ms = 1.0;
  c.transfer_bandwidth_bytes_per_ms = 1000.0;
  SimEngine engine(c);
  engine.add_device(device48());
  engine.add_device(device48());
  double first = -1, second = -1, reverse = -1;
  engine.schedule_at(0.0, [&] {
    engine.submit_transfer({0, 1, 1000, true}, -1, [&](double t) { first = t; });
    engine.submit_transfer({0, 1, 1000, true}, -1, [&](double t) { second = t; });
    engine.submit_transfer({1, 0, 1000, true}, -1, [&](double t) { reverse = t; });
  });
  engine.run();
  CHECK(first == 2.0);
  CHECK(second == 4.0);   // waits for the lane
  CHECK(reverse == 2.0);  // full duplex: opposite direction unaffected
}

TEST_CASE("overlap amortization: overlapped transfers add no more latency than blocking ones") {
  // Two contexts on the source device; a message pipeline alternates compute
  // and transfer. With a blocking transfer the copy occupies the context's
  // schedule, delaying the other context and inflating steady-state latency.
  auto run_variant = [](bool overlapped) {
    ContentionConfig c = quiet();
    c.transfer_latency_ms = 0.5;
    c.transfer_bandwidth_bytes_per_ms = 1.0e6;
    SimEngine engine(c);
    const int src = engine.add_device(device48());
    engine.add_device(device48());
    const int a = engine.create_context(src, "a", ContextKind::Compute);
    const int b = engine.create_context(src, "b", ContextKind::Compute);

    // Context b keeps the device moderately busy.
    for (int i = 0; i < 20; ++i) {
      engine.schedule_at(i * 5.0, [&, i] {
        engine.submit_kernel(src, kernel(b, 8, 2.0));
      });
    }
    // Context a: kernel then transfer, 10 messages; record total added time.
    std::vector<double> done;
    std::function<void(int)> send = [&](int i) {
      engine.submit_kernel(src, kernel(a, 8, 1.0), [&, i](double) {
        engine.submit_transfer({0, 1, 2'000'000, overlapped}, a, [&, i](double t) {
          done.push_back(t);
          if (i + 1 < 10) send(i + 1);
        });
      });
    };
    engine.schedule_at(0.0, [&] { send(0); });
    engine.run();
    return done.back();
  };
  const double with_overlap = run_variant(true);
  const double blocking = run_variant(false);
  CHECK(with_overlap <= blocking);
}

TEST_CASE("utilization: idle, half-busy, and windowing") {
  SimEngine engine(quiet());
  const int dev = engine.add_device(device48());
  const int ctx = engine.create_context(dev, "a", ContextKind::Compute);

  SUBCASE("idle device reads zero") {
    engine.schedule_at(10.0, [] {});
    engine.run();
    CHECK(engine.utilization(dev, 0.0, 10.0) == 0.0);
  }
  SUBCASE("24 of 48 SMs busy the whole window reads one half") {
    engine.submit_kernel(dev, kernel(ctx, 24, 10.0));
    engine.run();
    CHECK(engine.utilization(dev, 0.0, 10.0) == 0.5);
  }
  SUBCASE("empty window is an error") {
    CHECK_THROWS_AS(engine.utilization(dev, 5.0, 5.0), SimulationError);
  }
}

TEST_CASE("spatial partitions: tasks run uninterrupted and SM accounting adds up") {
  ContentionConfig c = quiet();
  SimEngine engine(c);
  const int dev = engine.add_device(device48(SchedMode::SpatialMPS));

  // Five clients at ceil(20% of 48) = 10 SMs; the grant budget caps the last
  // one at 8.
  std::vector<int> parts, ctxs;
  for (int i = 0; i < 5; ++i) {
    const int grant = std::min(10, 48 - 10 * i);
    parts.push_back(engine.create_partition(dev, grant, 2'000'000'000ULL,
                                            "client" + std::to_string(i)));
    ctxs.push_back(engine.create_context(dev, "client" + std::to_string(i),
                                         ContextKind::Compute, parts.back()));
  }

  std::vector<double> finish(5, -1);
  engine.schedule_at(0.0, [&] {
    for (int i = 0; i < 5; ++i) {
      engine.submit_kernel(dev, kernel(ctxs[static_cast<std::size_t>(i)], 10, 8.0),
                           [&finish, i](double t) { finish[static_cast<std::size_t>(i)] = t; });
    }
  });
  engine.run();

  // Clients with a full 10-SM grant run at full speed concurrently; the
  // capped 8-SM client takes 8 * 10/8 = 10 ms.
  for (int i = 0; i < 4; ++i) CHECK(finish[static_cast<std::size_t>(i)] == 8.0);
  CHECK(finish[4] == 10.0);

  // The utilization identity: busy-SM-time equals the sum of grant x time.
  const double util = engine.utilization(dev, 0.0, 10.0);
  const double busy = 4 * (10 * 8.0) + 1 * (8 * 10.0);
  CHECK(util == doctest::Approx(busy / (48.0 * 10.0)));

  // SM conservation: concurrent grants never exceed the device.
  const auto& segments = engine.busy_segments(dev);
  std::vector<double> edges;
  for (const auto& s : segments) {
    edges.push_back(s.t0);
    edges.push_back(s.t1);
  }
  for (double t : edges) {
    int held = 0;
    for (const auto& s : segments) {
      if (s.t0 <= t && t < s.t1) held += s.sms;
    }
    CHECK(held <= 48);
  }
}

TEST_CASE("spatial isolation: no two partitions' tasks share an instant and an SM") {
  // With disjoint grant accounting, concurrent busy segments can never exceed
  // the device, and per-partition concurrency never exceeds its grant.
  ContentionConfig c = quiet();
  SimEngine engine(c);
  const int dev = engine.add_device(device48(SchedMode::SpatialMPS));
  const int p0 = engine.create_partition(dev, 10, 1'000'000'000ULL, "a");
  const int p1 = engine.create_partition(dev, 10, 1'000'000'000ULL, "b");
  const int c0 = engine.create_context(dev, "a", ContextKind::Compute, p0);
  const int c1 = engine.create_context(dev, "b", ContextKind::Compute, p1);
  for (int i = 0; i < 6; ++i) {
    engine.schedule_at(i * 1.5, [&, i] {
      engine.submit_kernel(dev, kernel(i % 2 == 0 ? c0 : c1, 10, 4.0));
    });
  }
  engine.run();
  // Each partition holds at most 10 SMs at any instant.
  const auto& segments = engine.busy_segments(dev);
  for (const auto& s : segments) {
    CHECK(s.sms <= 10);
  }
  // Total concurrent usage stays within 20 reserved SMs.
  for (const auto& probe : segments) {
    int held = 0;
    for (const auto& s : segments) {
      if (s.t0 <= probe.t0 && probe.t0 < s.t1) held += s.sms;
    }
    CHECK(held <= 20);
  }
}

TEST_CASE("spatial partitions: queued streams wait for their partition") {
  ContentionConfig c = quiet();
  SimEngine engine(c);
  const int dev = engine.add_device(device48(SchedMode::SpatialMPS));
  const int part = engine.create_partition(dev, 10, 2'000'000'000ULL, "a");
  const int ctx = engine.create_context(dev, "a", ContextKind::Compute, part);

  // Three 5-SM streams into a 10-SM partition: two run, the third waits.
  std::vector<double> finish(3, -1);
  engine.schedule_at(0.0, [&] {
    for (int i = 0; i < 3; ++i) {
      auto t = kernel(ctx, 5, 9.0);
      t.stream_index = i;
      engine.submit_kernel(dev, t, [&finish, i](double x) { finish[static_cast<std::size_t>(i)] = x; });
    }
  });
  engine.run();
  CHECK(finish[0] == 9.0);
  CHECK(finish[1] == 9.0);
  CHECK(finish[2] == 18.0);  // starts when the first pair frees the partition
}

TEST_CASE("opportunistic pool: unreserved SMs boost waiting streams") {
  ContentionConfig c = quiet();
  c.opportunistic_sms = true;
  SimEngine engine(c);
  const int dev = engine.add_device(device48(SchedMode::SpatialMPS));
  const int part = engine.create_partition(dev, 8, 2'000'000'000ULL, "a");  // pool = 40
  const int ctx = engine.create_context(dev, "a", ContextKind::Compute, part);

  std::vector<double> finish(3, -1);
  engine.schedule_at(0.0, [&] {
    for (int i = 0; i < 3; ++i) {
      auto t = kernel(ctx, 5, 9.0);
      t.stream_index = i;
      engine.submit_kernel(dev, t, [&finish, i](double x) { finish[static_cast<std::size_t>(i)] = x; });
    }
  });
  engine.run();
  // Grants: 5 (partition), 3+2 (partition remnant + pool), 5 (pool): all full.
  CHECK(finish[0] == 9.0);
  CHECK(finish[1] == 9.0);
  CHECK(finish[2] == 9.0);
}

TEST_CASE("no partition on a spatial device is an error") {
  SimEngine engine(quiet());
  const int dev = engine.add_device(device48(SchedMode::SpatialMPS));
  const int ctx = engine.create_context(dev, "a", ContextKind::Compute);
  try {
    engine.submit_kernel(dev, kernel(ctx, 4, 1.0));
    FAIL("expected NoPartition");
  } catch (const SimulationError& e) {
    CHECK(e.code() == SimError::NoPartition);
  }
}

TEST_CASE("memory limits: partition cap and device capacity") {
  SimEngine engine(quiet());
  DeviceSpec small = device48(SchedMode::SpatialMPS);
  small.memory_capacity = 1'000'000;
  const int dev = engine.add_device(small);
  const int part = engine.create_partition(dev, 10, 500'000, "a");
  const int ctx = engine.create_context(dev, "a", ContextKind::Compute, part);
  try {
    engine.submit_kernel(dev, kernel(ctx, 4, 1.0, 600'000));
    FAIL("expected OutOfMemory");
  } catch (const SimulationError& e) {
    CHECK(e.code() == SimError::OutOfMemory);
  }

  DeviceSpec ts = device48();
  ts.memory_capacity = 100;
  const int dev2 = engine.add_device(ts);
  const int ctx2 = engine.create_context(dev2, "b", ContextKind::Compute);
  CHECK_THROWS_AS(engine.submit_kernel(dev2, kernel(ctx2, 4, 1.0, 200)), SimulationError);
}

TEST_CASE("engine determinism: same submissions produce identical event logs") {
  auto run_once = [] {
    ContentionConfig c = quiet();
    SimEngine engine(c);
    const int dev = engine.add_device(device48());
    const int a = engine.create_context(dev, "a", ContextKind::Compute);
    const int g = engine.create_context(dev, "g", ContextKind::Graphics);
    for (int i = 0; i < 10; ++i) {
      engine.schedule_at(i * 3.0, [&engine, dev, a, i] {
        engine.submit_kernel(dev, kernel(a, 6, 2.5 + (i % 3)));
      });
      engine.schedule_at(i * 3.0 + 1.0, [&engine, dev, g] {
        engine.submit_render(dev, g, 1.5);
      });
    }
    engine.run();
    std::ostringstream out;
    engine.write_event_log_csv(out);
    return out.str();
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("stopped engine rejects new work") {
  SimEngine engine(quiet());
  const int dev = engine.add_device(device48());
  const int ctx = engine.create_context(dev, "a", ContextKind::Compute);
  engine.stop();
  try {
    engine.submit_kernel(dev, kernel(ctx, 4, 1.0));
    FAIL("expected EngineStopped");
  } catch (const SimulationError& e) {
    CHECK(e.code() == SimError::EngineStopped);
  }
}

TEST_CASE("event log CSV header") {
  SimEngine engine(quiet());
  std::ostringstream out;
  engine.write_event_log_csv(out);
  CHECK(out.str() == "time_ms,device,context,event_kind,detail\n");
}
