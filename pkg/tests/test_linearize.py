import pytest

from stylenlg.experiment import load_dataset
from stylenlg.linearize import default_phrase_table, linearize, load_phrase_table
from stylenlg.mr import Domain, parse_personage_mr, parse_viggo_mr

TABLE1_DEMO_MR = (
    "name = nameVariable | eattype = restaurant | food = chinese | pricerange = moderate"
    " | area = riverside | familyfriendly = yes | near = nearVariable"
)
TABLE1_TARGET_MR = (
    "name = nameVariable | eattype = pub | food = Italian | area = city centre"
    " | familyfriendly = no | near = nearVariable"
)


def test_published_demo_pseudo_reference():
    mr = parse_personage_mr(TABLE1_DEMO_MR)
    assert linearize(mr) == (
        "nameVariable restaurant chinese moderate riverside family friendly nearVariable"
    )


def test_published_target_pseudo_reference():
    mr = parse_personage_mr(TABLE1_TARGET_MR)
    assert linearize(mr) == (
        "nameVariable pub Italian city centre not family friendly nearVariable"
    )


def test_seven_slot_canonical_output(restaurant_mr):
    # Input order is preserved and the high price renders as a spelled-out range.
    assert linearize(restaurant_mr) == (
        "nameVariable pub English high price range city centre not family friendly nearVariable"
    )


def test_single_slot():
    assert linearize(parse_personage_mr("name = nameVariable")) == "nameVariable"


def test_personality_never_included():
    mr = parse_personage_mr("name = nameVariable | personality = extravert")
    assert linearize(mr) == "nameVariable"


def test_determinism(restaurant_mr):
    assert linearize(restaurant_mr) == linearize(restaurant_mr)


def test_boolean_value_token_never_surfaces():
    for value in ("yes", "no"):
        mr = parse_personage_mr(f"name = x | familyfriendly = {value}")
        tokens = linearize(mr).lower().split()
        assert "yes" not in tokens and "no" not in tokens


def test_boolean_flip_changes_only_the_configured_phrase():
    yes = linearize(parse_personage_mr("name = x | familyfriendly = yes"))
    no = linearize(parse_personage_mr("name = x | familyfriendly = no"))
    assert yes == "x family friendly"
    assert no == "x not family friendly"


def test_nonboolean_values_appear_verbatim(corpora_dir):
    for name in ("personage_sample.csv", "viggo_sample.csv"):
        for demo in load_dataset(corpora_dir / name):
            pseudo = linearize(demo.mr)
            for slot in demo.mr.slots:
                if slot.kind.value in ("categorical", "placeholder", "open-text"):
                    if slot.name == "pricerange" and slot.value == "high":
                        continue  # table override spells this one out
                    assert slot.value in pseudo


def test_videogame_booleans(videogame_mr):
    assert linearize(videogame_mr) == (
        "Little Big Adventure average not multiplayer PlayStation"
    )


def test_videogame_act_flag():
    mr = parse_viggo_mr("give_opinion(name [SpellForce 3], rating [poor])")
    assert linearize(mr) == "SpellForce 3 poor"
    assert linearize(mr, include_act=True) == "give opinion SpellForce 3 poor"


def test_phrase_table_override(tmp_path, restaurant_mr):
    table_file = tmp_path / "phrases.txt"
    table_file.write_text(
        "pricerange=high\thigh price range\nfamilyfriendly=no\tkid friendly family friendly\n"
    )
    table = load_phrase_table(table_file)
    assert linearize(restaurant_mr, table=table) == (
        "nameVariable pub English high price range city centre"
        " kid friendly family friendly nearVariable"
    )


def test_boolean_without_table_entry_falls_back_to_slot_name():
    mr = parse_viggo_mr("inform(name [X], has_multiplayer [no])")
    assert linearize(mr, table={}) == "X not has multiplayer"


def test_default_tables_load_once():
    assert default_phrase_table(Domain.RESTAURANT)["familyfriendly=yes"] == "family friendly"
    assert default_phrase_table(Domain.VIDEOGAME)["has_multiplayer=yes"] == "multiplayer"


def test_empty_mr_rejected_upstream():
    with pytest.raises(Exception):
        parse_personage_mr("")
