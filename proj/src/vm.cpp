// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "chainbench/vm.hpp"

#include <limits>

namespace chainbench::vm {

const char* to_string(VmStatus status) {
    switch (status) {
        case VmStatus::Success: return "success";
        case VmStatus::OutOfSteps: return "out_of_steps";
        case VmStatus::Aborted: return "aborted";
    }
    return "unknown";
}

namespace {

// Locals layout of the loop script: i, x, y, z, tmp.
enum Local : std::uint64_t { kI = 0, kX = 1, kY = 2, kZ = 3, kTmp = 4 };

VmProgram compile_vm_heavy(std::uint64_t iterations) {
    VmProgram p;
    p.local_count = 5;
    auto& code = p.instructions;
    auto emit = [&code](OpCode op, std::uint64_t operand = 0) {
        code.push_back({op, operand});
    };
    // i = 0; x = 1; y = 1; z = 2;
    emit(OpCode::LoadConst, 0);
    emit(OpCode::StoreLocal, kI);
    emit(OpCode::LoadConst, 1);
    emit(OpCode::StoreLocal, kX);
    emit(OpCode::LoadConst, 1);
    emit(OpCode::StoreLocal, kY);
    emit(OpCode::LoadConst, 2);
    emit(OpCode::StoreLocal, kZ);
    // while (i < iterations)
    const std::uint64_t loop_head = code.size();
    emit(OpCode::CopyLocal, kI);
    emit(OpCode::LoadConst, iterations);
    emit(OpCode::LessThan);
    const std::uint64_t exit_patch = code.size();
    emit(OpCode::JumpIfFalse, 0);  // patched below
    //   i = i + 1
    emit(OpCode::CopyLocal, kI);
    emit(OpCode::LoadConst, 1);
    emit(OpCode::Add);
    emit(OpCode::StoreLocal, kI);
    //   tmp = z
    emit(OpCode::CopyLocal, kZ);
    emit(OpCode::StoreLocal, kTmp);
    //   z = x + y
    emit(OpCode::CopyLocal, kX);
    emit(OpCode::CopyLocal, kY);
    emit(OpCode::Add);
    emit(OpCode::StoreLocal, kZ);
    //   x = y
    emit(OpCode::CopyLocal, kY);
    emit(OpCode::StoreLocal, kX);
    //   y = tmp
    emit(OpCode::CopyLocal, kTmp);
    emit(OpCode::StoreLocal, kY);
    emit(OpCode::Jump, loop_head);
    code[exit_patch].operand = code.size();
    emit(OpCode::Return);
    return p;
}

}  // namespace

VmProgram compile(const Script& script) {
    switch (script.kind()) {
        case ScriptKind::DoNothing: {
            VmProgram p;
            p.instructions.push_back({OpCode::Return, 0});
            return p;
        }
        case ScriptKind::Transfer: {
            VmProgram p;
            p.instructions.push_back({OpCode::LoadConst, script.payee().value});
            p.instructions.push_back({OpCode::LoadConst, script.amount()});
            p.instructions.push_back({OpCode::Transfer, 0});
            p.instructions.push_back({OpCode::Return, 0});
            return p;
        }
        case ScriptKind::VmHeavy:
            return compile_vm_heavy(script.iterations());
    }
    throw std::logic_error("unreachable script kind");
}

VmDebugResult execute_debug(const VmProgram& program, const Address& sender,
                            const StateView& view, std::uint64_t max_steps) {
    VmDebugResult result;
    VmOutcome& out = result.outcome;
    std::vector<std::uint64_t>& locals = result.locals;
    locals.assign(program.local_count, 0);

    std::vector<std::uint64_t> stack;
    stack.reserve(8);
    std::vector<WriteOp> writes;

    auto abort_with = [&](const char* reason) {
        out.status = VmStatus::Aborted;
        out.abort_reason = reason;
        out.write_set.clear();
    };

    std::uint64_t pc = 0;
    while (true) {
        if (pc >= program.instructions.size()) {
            abort_with("pc out of bounds");
            return result;
        }
        if (out.steps_used == max_steps) {
            out.status = VmStatus::OutOfSteps;
            out.write_set.clear();
            return result;
        }
        ++out.steps_used;
        const Instruction& ins = program.instructions[pc];
        switch (ins.op) {
            case OpCode::LoadConst:
                stack.push_back(ins.operand);
                ++pc;
                break;
            case OpCode::CopyLocal:
                if (ins.operand >= locals.size()) {
                    abort_with("local index out of bounds");
                    return result;
                }
                stack.push_back(locals[ins.operand]);
                ++pc;
                break;
            case OpCode::StoreLocal:
                if (ins.operand >= locals.size() || stack.empty()) {
                    abort_with("bad store");
                    return result;
                }
                locals[ins.operand] = stack.back();
                stack.pop_back();
                ++pc;
                break;
            case OpCode::Add: {
                if (stack.size() < 2) {
                    abort_with("stack underflow");
                    return result;
                }
                const std::uint64_t b = stack.back();
                stack.pop_back();
                stack.back() += b;  // u64 wrap-around
                ++pc;
                break;
            }
            case OpCode::LessThan: {
                if (stack.size() < 2) {
                    abort_with("stack underflow");
                    return result;
                }
                const std::uint64_t b = stack.back();
                stack.pop_back();
                const std::uint64_t a = stack.back();
                stack.back() = a < b ? 1 : 0;
                ++pc;
                break;
            }
            case OpCode::JumpIfFalse: {
                if (stack.empty()) {
                    abort_with("stack underflow");
                    return result;
                }
                const std::uint64_t cond = stack.back();
                stack.pop_back();
                pc = cond == 0 ? ins.operand : pc + 1;
                break;
            }
            case OpCode::Jump:
                pc = ins.operand;
                break;
            case OpCode::Transfer: {
                if (stack.size() < 2) {
                    abort_with("stack underflow");
                    return result;
                }
                const std::uint64_t amount = stack.back();
                stack.pop_back();
                const Address payee{stack.back()};
                stack.pop_back();
                if (amount > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
                    abort_with("amount overflow");
                    return result;
                }
                if (!view.has_account(sender) || view.balance(sender) < amount) {
                    abort_with("insufficient balance");
                    return result;
                }
                if (!view.has_account(payee)) {
                    abort_with("unknown payee");
                    return result;
                }
                writes.push_back({sender, -static_cast<std::int64_t>(amount)});
                writes.push_back({payee, static_cast<std::int64_t>(amount)});
                ++pc;
                break;
            }
            case OpCode::Return:
                out.status = VmStatus::Success;
                out.write_set = std::move(writes);
                return result;
        }
    }
}

VmOutcome execute(const VmProgram& program, const Address& sender, const StateView& view,
                  std::uint64_t max_steps) {
    return execute_debug(program, sender, view, max_steps).outcome;
}

}  // namespace chainbench::vm
