// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chainbench/common.hpp"
#include "chainbench/script.hpp"

namespace chainbench::vm {

enum class OpCode : std::uint8_t {
    LoadConst,    // push operand
    CopyLocal,    // push locals[operand]
    StoreLocal,   // locals[operand] = pop
    Add,          // push pop + pop (u64 wrap-around)
    LessThan,     // b = pop, a = pop, push a < b
    JumpIfFalse,  // if pop == 0 jump to operand
    Jump,         // jump to operand
    Transfer,     // amount = pop, payee = pop; debit sender, credit payee
    Return,       // stop
};

struct Instruction {
    OpCode op;
    std::uint64_t operand = 0;
};

struct VmProgram {
    std::vector<Instruction> instructions;
    std::uint32_t local_count = 0;
};

// Read-only ledger view the interpreter consults for balances.
class StateView {
public:
    virtual ~StateView() = default;
    virtual bool has_account(const Address& address) const = 0;
    virtual std::uint64_t balance(const Address& address) const = 0;
};

enum class VmStatus : std::uint8_t { Success, OutOfSteps, Aborted };

const char* to_string(VmStatus status);

struct WriteOp {
    Address account;
    std::int64_t delta;  // balance change; a transfer debits and credits in one set

    bool operator==(const WriteOp&) const = default;
};

struct VmOutcome {
    VmStatus status = VmStatus::Success;
    std::string abort_reason;  // non-empty iff status == Aborted
    std::uint64_t steps_used = 0;
    std::vector<WriteOp> write_set;  // empty unless status == Success

    bool operator==(const VmOutcome&) const = default;
};

// Deterministic lowering: the same script always yields the identical program.
VmProgram compile(const Script& script);

// Executes with uniform cost of 1 step per instruction. Deterministic for
// identical (program, sender, view, max_steps).
VmOutcome execute(const VmProgram& program, const Address& sender, const StateView& view,
                  std::uint64_t max_steps);

// Same as execute but also reports final local slots, for debugging and for
// checking loop semantics against a reference.
struct VmDebugResult {
    VmOutcome outcome;
    std::vector<std::uint64_t> locals;
};
VmDebugResult execute_debug(const VmProgram& program, const Address& sender,
                            const StateView& view, std::uint64_t max_steps);

}  // namespace chainbench::vm
