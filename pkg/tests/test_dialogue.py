import pytest

from ieltsprep.service.dialogue import (
    DIALOGUE_STATES,
    SECTIONS,
    TRANSITIONS,
    DialogueState,
    dialogue_step,
    initial_state,
)


def run_turns(turns):
    state = initial_state()
    replies = []
    for text in turns:
        reply, state = dialogue_step(state, text)
        replies.append(reply)
    return replies, state


class TestHappyPath:
    def test_full_onboarding(self):
        _, state = run_turns(["hi", "Ada", "29", "yes", "introduction"])
        assert state.state == "WRITING"
        assert state.slots == {
            "candidate_name": "Ada",
            "candidate_age": 29,
            "selected_section": "introduction",
        }

    def test_greeting_transitions_on_any_input(self):
        for text in ["", "hello", "1234"]:
            _, state = dialogue_step(initial_state(), text)
            assert state.state == "ASK_NAME"

    @pytest.mark.parametrize("section", SECTIONS)
    def test_every_section_accepted(self, section):
        _, state = run_turns(["hi", "Sam", "30", "yes", section])
        assert state.state == "WRITING"
        assert state.slots["selected_section"] == section


class TestReprompts:
    def test_unparseable_age_keeps_state(self):
        _, state = run_turns(["hi", "Ada"])
        assert state.state == "ASK_AGE"
        reply, after = dialogue_step(state, "twenty")
        assert after == state
        assert "number" in reply

    @pytest.mark.parametrize("age", ["4", "121", "-3", "0"])
    def test_out_of_range_age_rejected(self, age):
        _, state = run_turns(["hi", "Ada"])
        _, after = dialogue_step(state, age)
        assert after.state == "ASK_AGE"

    @pytest.mark.parametrize("age,expected", [("5", 5), ("120", 120), (" 42 ", 42)])
    def test_boundary_ages_accepted(self, age, expected):
        _, state = run_turns(["hi", "Ada"])
        _, after = dialogue_step(state, age)
        assert after.state == "OFFER_EXERCISE"
        assert after.slots["candidate_age"] == expected

    def test_decline_offer_loops_back(self):
        _, state = run_turns(["hi", "Ada", "29"])
        reply, after = dialogue_step(state, "no")
        assert after.state == "OFFER_EXERCISE"
        assert "ready" in reply

    def test_bad_section_reprompts(self):
        _, state = run_turns(["hi", "Ada", "29", "yes"])
        _, after = dialogue_step(state, "abstract")
        assert after.state == "SECTION_SELECT"

    def test_empty_name_reprompts(self):
        _, state = run_turns(["hi"])
        _, after = dialogue_step(state, "   ")
        assert after.state == "ASK_NAME"
        assert "candidate_name" not in after.slots


class TestMachineShape:
    def test_no_unreachable_states(self):
        reached = {"GREETING"}
        frontier = ["GREETING"]
        while frontier:
            new = [
                t for s in frontier for t in TRANSITIONS[s] if t not in reached
            ]
            reached.update(new)
            frontier = new
        assert reached == set(DIALOGUE_STATES)

    def test_no_dead_ends(self):
        # every state can make progress or is the terminal WRITING state
        for state in DIALOGUE_STATES:
            assert TRANSITIONS[state], state

    def test_steps_follow_declared_transitions(self):
        probes = ["", "hello", "42", "yes", "no", "body", "nonsense"]
        seeds = {
            "GREETING": {},
            "ASK_NAME": {},
            "ASK_AGE": {"candidate_name": "A"},
            "OFFER_EXERCISE": {"candidate_name": "A", "candidate_age": 20},
            "SECTION_SELECT": {"candidate_name": "A", "candidate_age": 20},
            "WRITING": {"candidate_name": "A", "candidate_age": 20,
                        "selected_section": "full"},
        }
        for name, slots in seeds.items():
            for probe in probes:
                _, after = dialogue_step(DialogueState(name, dict(slots)), probe)
                assert after.state in TRANSITIONS[name]

    def test_deterministic_replies(self):
        state = DialogueState("ASK_AGE", {"candidate_name": "Ada"})
        assert dialogue_step(state, "30") == dialogue_step(state, "30")

    def test_unknown_state_rejected(self):
        with pytest.raises(ValueError):
            DialogueState("LIMBO")
