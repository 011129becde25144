#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "seqfuzz/coverage.hpp"

namespace seqfuzz {

/// Instrumentation points of the minipet mock; see fixtures/minipet_coverage_layout.md.
namespace minipet_bits {
inline constexpr std::size_t kTotal = 64;
inline constexpr std::size_t RouterRequest = 0;
inline constexpr std::size_t RouterUnknown = 1;
inline constexpr std::size_t RouterMalformedJson = 2;
inline constexpr std::size_t PostStoreEntry = 3;
inline constexpr std::size_t PostStoreInvalid = 4;
inline constexpr std::size_t PostStoreCreated = 5;
inline constexpr std::size_t GetStoreEntry = 6;
inline constexpr std::size_t GetStoreVoucher = 7;
inline constexpr std::size_t GuardW = 8;
inline constexpr std::size_t GuardWU = 9;
inline constexpr std::size_t GuardWUP = 10;
inline constexpr std::size_t GuardWUPPI = 11;
inline constexpr std::size_t GuardMagic = 12;
inline constexpr std::size_t GetStoreNotFound = 13;
inline constexpr std::size_t GetStoreFound = 14;
inline constexpr std::size_t PutStoreEntry = 15;
inline constexpr std::size_t PutStoreInvalid = 16;
inline constexpr std::size_t PutStoreNotFound = 17;
inline constexpr std::size_t PutStoreUpdated = 18;
inline constexpr std::size_t DeleteStoreEntry = 19;
inline constexpr std::size_t DeleteStoreNotFound = 20;
inline constexpr std::size_t DeleteStoreDeleted = 21;
inline constexpr std::size_t DeleteStoreOrphans = 22;
inline constexpr std::size_t PostPetEntry = 23;
inline constexpr std::size_t PostPetInvalid = 24;
inline constexpr std::size_t PostPetNoStoreId = 25;
inline constexpr std::size_t PostPetUnknownStore = 26;
inline constexpr std::size_t PostPetCreated = 27;
inline constexpr std::size_t GetPetEntry = 28;
inline constexpr std::size_t GetPetNotFound = 29;
inline constexpr std::size_t GetPetDangling = 30;
inline constexpr std::size_t GetPetFound = 31;
inline constexpr std::size_t PutPetEntry = 32;
inline constexpr std::size_t PutPetInvalid = 33;
inline constexpr std::size_t PutPetNameTooLong = 34;
inline constexpr std::size_t PutPetNotFound = 35;
inline constexpr std::size_t PutPetUpdated = 36;
inline constexpr std::size_t DeletePetEntry = 37;
inline constexpr std::size_t DeletePetNotFound = 38;
inline constexpr std::size_t DeletePetDeleted = 39;
} // namespace minipet_bits

/// The bundled minipet OpenAPI document.
const std::string& minipet_spec_yaml();

/// In-process minipet server plus its coverage agent on a second port.
class MockSut {
public:
  MockSut();
  ~MockSut();
  MockSut(const MockSut&) = delete;
  MockSut& operator=(const MockSut&) = delete;

  /// Port 0 picks a free port. Throws Error(PortInUse).
  void start(int api_port = 0, int agent_port = 0, std::uint64_t rng_seed = 0);
  void stop();
  /// Clears stores, pets, the id counter and the coverage accumulator.
  void reset_state();

  int api_port() const;
  int agent_port() const;
  std::string base_url() const;
  std::string agent_url() const;

  /// Accumulated coverage since the last reset.
  LineCoverageMap coverage() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace seqfuzz
