package chatapp.ui;

public class TextBox {
    private String value = "";

    public String getText() {
        return this.value;
    }
}
