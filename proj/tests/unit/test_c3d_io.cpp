#include <cstring>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"

using namespace exogait;

namespace {

Trial small_trial() {
  Trial t;
  t.point_rate = 100.0;
  t.analog_rate = 200.0;
  t.first_frame = 1;
  t.last_frame = 3;
  MarkerTrajectory m{"LHEE", {}};
  for (int f = 0; f < 3; ++f) {
    PointFrame pf;
    pf.valid = f != 1;
    pf.xyz = {1.5 * f, -2.0, 1000.25};
    m.frames.push_back(pf);
  }
  t.markers.push_back(m);
  t.analogs.push_back({"LAnkleAngle", "deg", {1, 2, 3, 4, 5, 6}, 200.0});
  t.events.push_back({"Left", "Foot Strike", 0.0});
  t.events.push_back({"Left", "Foot Off", 0.5});
  t.subject_meta["condition"] = "ExoOff";
  return t;
}

}  // namespace

TEST_CASE("c3d round trip keeps the payload") {
  const Trial t = small_trial();
  const auto bytes = write_c3d(t);
  REQUIRE(bytes.size() % 512 == 0);
  CHECK(bytes[1] == 0x50);
  const Trial back = read_c3d(bytes);
  std::string why;
  CHECK_MESSAGE(fixtures::same_payload(t, back, 1e-4, &why), why);
  CHECK(back.markers[0].frames[1].valid == false);
  CHECK(back.analog_ratio() == 2);
  CHECK(back.start_time() == 0.0);
}

TEST_CASE("c3d round trip over random trials") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 30; ++i) {
    const Trial t = fixtures::random_trial(rng);
    const Trial back = read_c3d(write_c3d(t));
    std::string why;
    CHECK_MESSAGE(fixtures::same_payload(t, back, 1e-4, &why), why);
  }
}

TEST_CASE("c3d header errors") {
  auto bytes = write_c3d(small_trial());

  SUBCASE("bad magic") {
    bytes[1] = 0x00;
    CHECK_THROWS_WITH_AS(read_c3d(bytes), doctest::Contains("0x50"), Error);
    try {
      read_c3d(bytes);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedHeader);
    }
  }
  SUBCASE("DEC processor") {
    const std::size_t p = (static_cast<std::size_t>(bytes[0]) - 1) * 512;
    bytes[p + 3] = 85;
    try {
      read_c3d(bytes);
      FAIL("expected UnsupportedProcessor");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedProcessor);
    }
  }
  SUBCASE("truncated at every length") {
    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{100}, std::size_t{512}, std::size_t{700},
                          bytes.size() - 512}) {
      std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
      try {
        read_c3d(cut);
        FAIL("expected an error at length " << n);
      } catch (const Error& e) {
        CHECK_MESSAGE(e.code() == ErrorCode::TruncatedData, "length " << n << ": " << e.what());
      }
    }
  }
}

TEST_CASE("c3d reader scales integer storage and metre units") {
  // Build a float file, then rewrite it as integer storage by hand is overkill; check units
  // conversion via the POINT:UNITS path instead by patching the written text.
  Trial t = small_trial();
  auto bytes = write_c3d(t);
  const char* needle = "UNITS";
  bool patched = false;
  for (std::size_t i = 0; i + 8 < bytes.size() && !patched; ++i) {
    if (std::memcmp(&bytes[i], needle, 5) == 0) {
      // Parameter layout after the name: offset(2) type(1) ndims(1) dims... data.
      const std::size_t type_pos = i + 5 + 2;
      if (static_cast<std::int8_t>(bytes[type_pos]) == -1 && bytes[type_pos + 1] == 1 && bytes[type_pos + 2] == 2 &&
          bytes[type_pos + 3] == 'm' && bytes[type_pos + 4] == 'm') {
        bytes[type_pos + 4] = ' ';
        patched = true;
      }
    }
  }
  REQUIRE(patched);
  const Trial back = read_c3d(bytes);
  CHECK(back.markers[0].frames[0].xyz[2] == doctest::Approx(1000250.0));
}

TEST_CASE("c3d writer refuses unwritable trials") {
  Trial empty;
  empty.point_rate = 100.0;
  try {
    write_c3d(empty);
    FAIL("expected EmptyTrial");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTrial);
  }
  Trial big;
  big.point_rate = 100.0;
  big.first_frame = 1;
  big.last_frame = 0;
  big.markers.resize(kMaxC3dMarkers + 1);
  try {
    write_c3d(big);
    FAIL("expected TooManyMarkers");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyMarkers);
  }
}

TEST_CASE("csv trial grammar") {
  const char* text =
      "time,LHEE.x,LHEE.y,LHEE.z,analog:LAnkleAngle\n"
      "0.00,1,2,3,10\n"
      "0.01,,,,11\n"
      "0.02,4,5,6,12\n"
      "0.03,7,8,9,13\n"
      "0.04,1,1,1,14\n";
  const Trial t = read_csv_trial(text);
  CHECK(t.point_rate == doctest::Approx(100.0));
  REQUIRE(t.markers.size() == 1);
  CHECK(t.markers[0].frames.size() == 5);
  CHECK_FALSE(t.markers[0].frames[1].valid);
  CHECK(t.markers[0].frames[2].xyz[1] == 5.0);
  CHECK(t.analogs[0].samples.back() == 14.0);
  CHECK(t.first_frame == 1);
  CHECK(t.frame_count() == 5);
}

TEST_CASE("csv trial errors") {
  auto code_of = [](const char* text) {
    try {
      read_csv_trial(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("t,A.x,A.y,A.z\n0,1,2,3\n0.1,1,2,3\n") == ErrorCode::BadHeaderRow);
  CHECK(code_of("time,A.x,A.y\n0,1,2\n0.1,1,2\n") == ErrorCode::BadHeaderRow);
  CHECK(code_of("time,A.x,A.y,A.z\n0,1,2,3\n0.1,1,2\n") == ErrorCode::RaggedRows);
  CHECK(code_of("time,A.x,A.y,A.z\n0,1,,3\n0.1,1,2,3\n") == ErrorCode::NonNumericCell);
  CHECK(code_of("time,A.x,A.y,A.z\n0,1,2,3\n0.1,1,2,3\n0.3,1,2,3\n") == ErrorCode::NonUniformSampling);
}

TEST_CASE("event mapping") {
  CHECK(map_event({"left", "heel strike", 1.0}) == GaitEvent{Side::Left, EventKind::FootStrike, 1.0});
  CHECK(map_event({"RIGHT", "Toe Off", 2.0}) == GaitEvent{Side::Right, EventKind::FootOff, 2.0});
  CHECK_THROWS_AS(map_event({"Left", "General", 0.0}), Error);
  CHECK_THROWS_AS(map_event({"Middle", "Foot Strike", 0.0}), Error);

  const auto recs = read_events_csv("context,label,time\nRight,Foot Off,0.6\nLeft,Foot Strike,0.0\n");
  Trial t;
  t.events = recs;
  const auto ev = extract_events(t);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].time == 0.0);
  CHECK(ev[1].side == Side::Right);
  CHECK(to_record(ev[0]) == EventRecord{"Left", "Foot Strike", 0.0});
}
